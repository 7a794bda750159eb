"""Command-line interface: solve, sweep, verify, constants.

Owns the persistence formats.  Sweep records go to CSV with a frozen
column order (or JSON); solutions and verification reports go to
canonical JSON (sorted keys, two-space indent, trailing newline), which
round-trips byte-identically.  All numbers are serialized with shortest
round-trip precision, so downstream extrapolation is not precision
limited.

Exit codes: 0 pass, 2 config or input error, 3 solver error,
4 verification failure.

Environment overrides (used when the corresponding flag is absent):
BNBALL_RTOL, BNBALL_ATOL, BNBALL_RESIDUAL_TOL, BNBALL_BOUNDARY_TOL.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import asymptotics, bubble, diagnostics, shooting
from .model import (
    ConfigError,
    Error,
    FileIOError,
    InsufficientRecords,
    NodalFeatures,
    Params,
)
from .ode import DEFAULT_ATOL, DEFAULT_RTOL

EXIT_PASS = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4

CSV_COLUMNS = (
    "lambda",
    "r_lambda",
    "s_lambda",
    "m_plus",
    "m_minus",
    "du_node",
    "du_boundary",
    "sigma",
    "rho",
    "gamma",
    "q1",
    "q2",
    "q3",
    "p1",
    "p2",
    "p3",
    "p4",
    "bubble_dev_plus",
    "bubble_dev_minus",
    "green_dev",
    "green_grad_dev",
    "energy",
    "nehari",
    "pohozaev_ball",
    "pohozaev_annulus",
)
CSV_HEADER = CSV_COLUMNS + ("error",)

_FEATURE_COLUMNS = (
    "r_lambda",
    "s_lambda",
    "m_plus",
    "m_minus",
    "du_node",
    "du_boundary",
    "sigma",
    "rho",
    "gamma",
)


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """Validated settings for one command invocation."""

    n: int
    lam: float | None = None
    lambda_grid: tuple[float, ...] | None = None
    k: int = 2
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    boundary_tol: float = 1e-9
    residual_tol: float = 1e-6
    epsilon: float | None = None
    annulus: tuple[float, float] = (0.2, 0.8)
    out: str | None = None
    fmt: str = "csv"
    warm_start: bool = True
    parallel: int = 0

    def __post_init__(self):
        for name in ("rtol", "atol", "boundary_tol", "residual_tol"):
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.lambda_grid is not None:
            grid = self.lambda_grid
            if any(b >= a for a, b in zip(grid, grid[1:])):
                raise ConfigError("lambda grid must be strictly decreasing")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.fmt!r}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")


def _fmt_number(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return ""
    return repr(x)


def _scrub(obj):
    """Make an object JSON-safe: dataclasses/ndarrays to builtins, non-finite to None."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _scrub(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _scrub(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_scrub(v) for v in obj]
    if hasattr(obj, "tolist"):
        return _scrub(obj.tolist())
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (int, str, bool)) or obj is None:
        return obj
    return str(obj)


def canonical_json(obj) -> str:
    return json.dumps(_scrub(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _error_payload(exc: Error) -> str:
    return canonical_json({"error": exc.code, "message": str(exc)})


def _env_float(name: str, fallback: float) -> float:
    raw = os.environ.get(name)
    if raw is None:
        return fallback
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{name} must be a number, got {raw!r}") from exc


def record_to_row(record: asymptotics.SweepRecord) -> list[str]:
    f = record.features
    feature_vals = (
        [getattr(f, name) for name in _FEATURE_COLUMNS] if f is not None else [None] * 9
    )
    vals = (
        [record.lam]
        + feature_vals
        + [
            record.q1,
            record.q2,
            record.q3,
            record.p1,
            record.p2,
            record.p3,
            record.p4,
            record.bubble_dev_plus,
            record.bubble_dev_minus,
            record.green_dev,
            record.green_grad_dev,
            record.energy,
            record.nehari,
            record.pohozaev_ball,
            record.pohozaev_annulus,
        ]
    )
    return [_fmt_number(v) for v in vals] + [""]


def record_to_dict(record: asymptotics.SweepRecord) -> dict:
    out = {"lambda": record.lam}
    f = record.features
    for name in _FEATURE_COLUMNS:
        out[name] = getattr(f, name) if f is not None else None
    for name in CSV_COLUMNS[10:]:
        out[name] = getattr(record, name)
    out["error"] = None
    return out


def _record_from_mapping(row: dict) -> asymptotics.SweepRecord | None:
    """Rebuild a SweepRecord from one CSV/JSON row; None for failure rows."""
    err = row.get("error")
    if err:
        return None

    def num(name):
        v = row.get(name)
        if v is None or v == "":
            return math.nan
        return float(v)

    feature_vals = {name: num(name) for name in _FEATURE_COLUMNS}
    features = None
    if all(math.isfinite(v) for v in feature_vals.values()):
        features = NodalFeatures(**feature_vals)
    return asymptotics.SweepRecord(
        lam=num("lambda"),
        features=features,
        q1=num("q1"),
        q2=num("q2"),
        q3=num("q3"),
        p1=num("p1"),
        p2=num("p2"),
        p3=num("p3"),
        p4=num("p4"),
        bubble_dev_plus=num("bubble_dev_plus"),
        bubble_dev_minus=num("bubble_dev_minus"),
        green_dev=num("green_dev"),
        green_grad_dev=num("green_grad_dev"),
        energy=num("energy"),
        nehari=num("nehari"),
        pohozaev_ball=num("pohozaev_ball"),
        pohozaev_annulus=num("pohozaev_annulus"),
    )


def load_records(path: str) -> list[asymptotics.SweepRecord]:
    if path.endswith(".json"):
        with open(path) as fh:
            payload = json.load(fh)
        rows = payload["records"] if isinstance(payload, dict) else payload
        out = [_record_from_mapping(r) for r in rows]
    else:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            out = [_record_from_mapping(r) for r in reader]
    return [r for r in out if r is not None]


def _solution_payload(solution: shooting.SignChangingSolution) -> dict:
    profile = solution.profile
    return {
        "n": solution.params.n,
        "lambda": solution.params.lam,
        "k": solution.k,
        "a_star": solution.a_star,
        "features": solution.features,
        "residuals": solution.residuals,
        "profile": {
            "knots": profile.knots,
            "values": profile.values,
            "derivs": profile.derivs,
            "r_end": profile.r_end,
        },
        "events": [
            {"kind": e.kind, "r": e.r, "value": e.value} for e in profile.events
        ],
    }


def cmd_solve(config: RunConfig) -> int:
    if config.lam is None:
        raise ConfigError("solve needs --lambda")
    try:
        solution = shooting.solve_nodal(
            Params(n=config.n, lam=config.lam),
            config.k,
            rtol=config.rtol,
            atol=config.atol,
            boundary_tol=config.boundary_tol,
            residual_tol=config.residual_tol,
        )
    except ConfigError:
        raise
    except Error as exc:
        sys.stdout.write(_error_payload(exc))
        return EXIT_SOLVER
    _emit(canonical_json(_solution_payload(solution)), config.out)
    if config.out:
        print(f"wrote {config.out} (a_star={solution.a_star:.12g})")
    return EXIT_PASS


def _sweep_point(
    n: int,
    lam: float,
    k: int,
    a_seed: float,
    rtol: float,
    atol: float,
    boundary_tol: float,
    residual_tol: float,
    annulus: tuple[float, float],
):
    """Solve one grid point and reduce it to picklable pieces."""
    try:
        sol = shooting.solve_nodal(
            Params(n=n, lam=lam),
            k,
            a_seed=a_seed,
            rtol=rtol,
            atol=atol,
            boundary_tol=boundary_tol,
            residual_tol=residual_tol,
        )
        record = asymptotics.build_record(sol, annulus=annulus)
    except Error as exc:
        return lam, None, exc.code, str(exc), None
    return lam, record, None, None, sol.a_star


def cmd_sweep(config: RunConfig) -> int:
    if config.lambda_grid is None:
        raise ConfigError("sweep needs --lambda-grid")
    grid = list(config.lambda_grid)
    results = []
    if config.parallel > 0:
        # Workers cannot share bracket seeds, so each point starts cold.
        jobs = [
            (
                config.n,
                lam,
                config.k,
                1.0,
                config.rtol,
                config.atol,
                config.boundary_tol,
                config.residual_tol,
                config.annulus,
            )
            for lam in grid
        ]
        with ProcessPoolExecutor(max_workers=config.parallel) as pool:
            results = list(pool.map(_sweep_point, *zip(*jobs)))
    else:
        seeds: list[float] = []
        for lam in grid:
            if config.warm_start and len(seeds) >= 2:
                a_seed = seeds[-1] * (seeds[-1] / seeds[-2])
            elif config.warm_start and seeds:
                a_seed = seeds[-1]
            else:
                a_seed = 1.0
            point = _sweep_point(
                config.n,
                lam,
                config.k,
                a_seed,
                config.rtol,
                config.atol,
                config.boundary_tol,
                config.residual_tol,
                config.annulus,
            )
            results.append(point)
            if point[4] is not None:
                seeds.append(point[4])

    if config.fmt == "json":
        rows = []
        for lam, record, code, detail, _ in results:
            if record is not None:
                rows.append(record_to_dict(record))
            else:
                row = {name: None for name in CSV_COLUMNS}
                row["lambda"] = lam
                row["error"] = code
                row["detail"] = detail
                rows.append(row)
        text = canonical_json({"n": config.n, "k": config.k, "records": rows})
    else:
        lines = [",".join(CSV_HEADER)]
        for lam, record, code, _detail, _ in results:
            if record is not None:
                lines.append(",".join(record_to_row(record)))
            else:
                cells = [_fmt_number(lam)] + [""] * (len(CSV_COLUMNS) - 1) + [code]
                lines.append(",".join(cells))
        text = "\n".join(lines) + "\n"
    _emit(text, config.out)
    if config.out:
        solved = sum(1 for r in results if r[1] is not None)
        print(f"wrote {config.out} ({solved}/{len(grid)} points solved)")
    failed = [r for r in results if r[1] is None]
    return EXIT_SOLVER if failed and not any(r[1] is not None for r in results) else EXIT_PASS


def _verdict_table(report: dict) -> str:
    rows = []
    head = f"{'quantity':<18}{'extrapolated':>16}{'limit':>16}{'rel.err':>10}  {'trend':<10}{'verdict':<8}"
    rows.append(head)
    rows.append("-" * len(head))
    for name, v in report["quantities"].items():
        trend = "dec" if v["gaps_strictly_decreasing"] else "non-mono"
        verdict = "PASS" if v["passed"] else ("FAIL" if v["gated"] else "info")
        rows.append(
            f"{name:<18}{v['extrapolated']:>16.8g}{v['limit']:>16.8g}"
            f"{v['relative_error']:>10.2e}  {trend:<10}{verdict:<8}"
        )
    for name, t in report["trends"].items():
        trend = "dec" if t["strictly_decreasing"] else "non-mono"
        tail = t["values"][-1]
        rows.append(
            f"{name:<18}{tail:>16.8g}{'-> 0':>16}{'':>10}  {trend:<10}"
            f"{'PASS' if t['passed'] else 'FAIL':<8}"
        )
    s = report["slope_log_m_minus"]
    rows.append(
        f"{'slope log M-':<18}{s['value']:>16.8g}{s['target']:>16.8g}"
        f"{abs(s['value'] - s['target']):>10.2e}  {'tail-3':<10}"
        f"{'PASS' if s['passed'] else 'FAIL':<8}"
    )
    i = report["identity_q3_q1_q2"]
    rows.append(
        f"{'q3*q1 = q2':<18}{i['max_relative_gap']:>16.2e}{'0':>16}{'':>10}  "
        f"{'all rows':<10}{'PASS' if i['passed'] else 'FAIL':<8}"
    )
    rows.append(f"overall: {'PASS' if report['overall_pass'] else 'FAIL'}")
    return "\n".join(rows) + "\n"


def cmd_verify(config: RunConfig, records_path: str) -> int:
    records = load_records(records_path)
    try:
        report = asymptotics.rate_law_report(records, config.n)
    except InsufficientRecords as exc:
        sys.stdout.write(_error_payload(exc))
        return EXIT_CONFIG
    sys.stdout.write(_verdict_table(report))
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(canonical_json(report))
        print(f"wrote {config.out}")
    return EXIT_PASS if report["overall_pass"] else EXIT_VERIFY


def cmd_constants(config: RunConfig) -> int:
    cst = bubble.constants(config.n)
    payload = dataclasses.asdict(cst)
    payload["n"] = config.n
    _emit(canonical_json(payload), config.out)
    return EXIT_PASS


def _parse_grid(raw: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in raw.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse lambda grid {raw!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bnball",
        description=(
            "Least-energy radial sign-changing solutions of the "
            "Brezis-Nirenberg problem on the unit ball, by node-targeted "
            "shooting, with asymptotic-law verification."
        ),
        epilog=(
            "Tolerance environment overrides: BNBALL_RTOL, BNBALL_ATOL, "
            "BNBALL_RESIDUAL_TOL, BNBALL_BOUNDARY_TOL."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_lambda=False, need_grid=False):
        p.add_argument("--n", type=int, required=True, help="space dimension")
        if need_lambda:
            p.add_argument(
                "--lambda", dest="lam", type=float, required=True,
                help="linear coefficient, in (0, lambda_1)",
            )
        if need_grid:
            p.add_argument(
                "--lambda-grid", required=True,
                help="comma-separated, strictly decreasing, e.g. 4,2,1,0.5,0.25",
            )
        p.add_argument("--k", type=int, default=2, help="number of nodal regions")
        p.add_argument("--rtol", type=float, default=None)
        p.add_argument("--atol", type=float, default=None)
        p.add_argument("--residual-tol", type=float, default=None)
        p.add_argument("--boundary-tol", type=float, default=None)
        p.add_argument("--out", default=None, help="output path (stdout when absent)")

    p_solve = sub.add_parser("solve", help="solve one (n, lambda, k) problem")
    common(p_solve, need_lambda=True)

    p_sweep = sub.add_parser("sweep", help="solve along a decreasing lambda grid")
    common(p_sweep, need_grid=True)
    p_sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    p_sweep.add_argument(
        "--annulus", default="0.2,0.8",
        help="comparison annulus for the Green-limit gaps",
    )
    p_sweep.add_argument(
        "--no-warm-start", action="store_true",
        help="seed every point at a=1 instead of extrapolating the bracket",
    )
    p_sweep.add_argument(
        "--parallel", type=int, default=0, metavar="WORKERS",
        help="solve points on a process pool (implies --no-warm-start)",
    )

    p_verify = sub.add_parser("verify", help="check rate laws over a records file")
    p_verify.add_argument("records", help="CSV or JSON produced by sweep")
    p_verify.add_argument("--n", type=int, required=True)
    p_verify.add_argument("--out", default=None, help="write the JSON report here")

    p_const = sub.add_parser("constants", help="print the dimensional constants")
    p_const.add_argument("--n", type=int, required=True)
    p_const.add_argument("--out", default=None)

    return parser


def _config_from(args: argparse.Namespace) -> RunConfig:
    grid = None
    if getattr(args, "lambda_grid", None) is not None:
        grid = _parse_grid(args.lambda_grid)
    annulus = (0.2, 0.8)
    if getattr(args, "annulus", None):
        parts = _parse_grid(args.annulus)
        if len(parts) != 2:
            raise ConfigError(f"annulus needs two radii, got {args.annulus!r}")
        annulus = (parts[0], parts[1])
    parallel = getattr(args, "parallel", 0) or 0
    return RunConfig(
        n=args.n,
        lam=getattr(args, "lam", None),
        lambda_grid=grid,
        k=getattr(args, "k", 2),
        rtol=args.rtol
        if getattr(args, "rtol", None) is not None
        else _env_float("BNBALL_RTOL", DEFAULT_RTOL),
        atol=args.atol
        if getattr(args, "atol", None) is not None
        else _env_float("BNBALL_ATOL", DEFAULT_ATOL),
        residual_tol=args.residual_tol
        if getattr(args, "residual_tol", None) is not None
        else _env_float("BNBALL_RESIDUAL_TOL", 1e-6),
        boundary_tol=args.boundary_tol
        if getattr(args, "boundary_tol", None) is not None
        else _env_float("BNBALL_BOUNDARY_TOL", 1e-9),
        out=getattr(args, "out", None),
        fmt=getattr(args, "format", "csv"),
        warm_start=not (
            getattr(args, "no_warm_start", False) or parallel > 0
        ),
        parallel=parallel,
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, which matches the config-error code
        return int(exc.code or 0)
    try:
        config = _config_from(args)
        if args.command == "solve":
            return cmd_solve(config)
        if args.command == "sweep":
            return cmd_sweep(config)
        if args.command == "verify":
            return cmd_verify(config, args.records)
        if args.command == "constants":
            return cmd_constants(config)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        sys.stdout.write(_error_payload(exc))
        return EXIT_CONFIG
    except Error as exc:
        sys.stdout.write(_error_payload(exc))
        return EXIT_SOLVER
    except OSError as exc:
        # unreadable records or unwritable --out target
        sys.stdout.write(_error_payload(FileIOError(str(exc))))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
