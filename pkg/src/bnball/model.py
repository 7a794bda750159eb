"""Problem parameters, derived exponents, and the shared error taxonomy.

The problem under study is the critical-exponent equation on the unit ball,

    -Delta u = lambda * u + |u|^(2*-2) * u   in B_1 c R^n,   u = 0 on dB_1,

with 2* = 2n/(n-2) the critical Sobolev exponent.  Every other module works
with a `Params` instance; all quantities are dimensionless and everything is
64-bit floating point.

Derived exponents, all functions of n alone:

    two_star = 2n/(n-2)
    beta     = 2/(n-2)          inner rescaling exponent, y = M^beta x
    rate_exp = 2 - 2*beta       growth-rate exponent (2n-8)/(n-2)
    green_exp = (n-2)/(2n-8)    divergence order of the annulus amplitude,
                                defined only for n >= 5
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class Error(Exception):
    """Base class for all package errors.

    `code` is a stable, machine-readable slug; the CLI prints it and maps it
    to exit codes.
    """

    code = "error"


class InvalidDimension(Error):
    code = "invalid-dimension"


class UndefinedExponent(Error):
    code = "undefined-exponent"


class NonpositiveLambda(Error):
    code = "nonpositive-lambda"


class InvalidLambda(Error):
    code = "invalid-lambda"


class SingularPoint(Error):
    code = "singular-point"


class StartStepTooCoarse(Error):
    code = "start-step-too-coarse"


class IntegrationFailed(Error):
    code = "integration-failed"

    def __init__(self, message: str, last_radius: float | None = None):
        super().__init__(message)
        self.last_radius = last_radius


class BlowUpDetected(Error):
    code = "blow-up-detected"


class DegenerateAmplitude(Error):
    code = "degenerate-amplitude"


class NoBracketFound(Error):
    code = "no-bracket-found"

    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report or {}


class NonconvergentBisection(Error):
    code = "nonconvergent-bisection"


class CertificationFailed(Error):
    code = "certification-failed"


class MissingInteriorZero(Error):
    code = "missing-interior-zero"


class MissingMinimum(Error):
    code = "missing-minimum"


class NonconvergentIntegral(Error):
    code = "nonconvergent-integral"


class UndefinedConstants(Error):
    code = "undefined-constants"


class UndefinedResidual(Error):
    code = "undefined-residual"


class OutOfDomain(Error):
    code = "out-of-domain"


class EmptyWindow(Error):
    code = "empty-window"


class EmptyDomain(Error):
    code = "empty-domain"


class RegionEmpty(Error):
    code = "region-empty"


class EpsilonOutOfRange(Error):
    code = "epsilon-out-of-range"


class InsufficientRecords(Error):
    code = "insufficient-records"


class ConfigError(Error):
    code = "config-parse-error"


class FileIOError(Error):
    code = "file-io-error"


@dataclass(frozen=True)
class Exponents:
    """The exponent block derived from the dimension alone."""

    two_star: float
    beta: float
    rate_exp: float
    _green_exp: float | None

    @property
    def green_exp(self) -> float:
        # (n-2)/(2n-8) divides by zero at n=4 and is meaningless below n=5.
        if self._green_exp is None:
            raise UndefinedExponent(
                "green_exp = (n-2)/(2n-8) is defined only for n >= 5"
            )
        return self._green_exp


def derive_exponents(n: int) -> Exponents:
    """Derived exponents for dimension n.

    two_star and beta exist for every n >= 3; green_exp only for n >= 5
    (requesting it below that raises UndefinedExponent).
    """
    if not isinstance(n, int) or isinstance(n, bool):
        raise InvalidDimension(f"dimension must be an integer, got {n!r}")
    if n < 3:
        raise InvalidDimension(f"dimension must be >= 3, got {n}")
    two_star = 2.0 * n / (n - 2.0)
    beta = 2.0 / (n - 2.0)
    rate_exp = 2.0 - 2.0 * beta
    green_exp = (n - 2.0) / (2.0 * n - 8.0) if n >= 5 else None
    return Exponents(two_star, beta, rate_exp, green_exp)


@dataclass(frozen=True)
class Params:
    """Problem instance: dimension n and coefficient lambda.

    lam = 0 is admitted so the pure critical equation (whose explicit
    ground state is the standard bubble) can serve as an integrator oracle;
    boundary-value solving additionally requires 0 < lam < lambda_1(B_1),
    which `validate_lambda` checks.
    """

    n: int
    lam: float

    def __post_init__(self):
        derive_exponents(self.n)  # validates n
        if not math.isfinite(self.lam) or self.lam < 0.0:
            raise InvalidLambda(f"lambda must be finite and >= 0, got {self.lam}")

    @property
    def two_star(self) -> float:
        return 2.0 * self.n / (self.n - 2.0)

    @property
    def beta(self) -> float:
        return 2.0 / (self.n - 2.0)

    @property
    def rate_exp(self) -> float:
        return 2.0 - 2.0 * self.beta

    @property
    def green_exp(self) -> float:
        return derive_exponents(self.n).green_exp

    def nonlinearity(self, u: float) -> float:
        """f(u) = lambda*u + |u|^(2*-2)*u, the full right-hand side source."""
        return self.lam * u + abs(u) ** (self.two_star - 2.0) * u


@dataclass(frozen=True)
class NodalFeatures:
    """Scalar features of a radial solution with two nodal regions.

    r_lambda is the node (sign-change radius), s_lambda the global minimum
    point in (r_lambda, 1), m_plus = u(0), m_minus = |u(s_lambda)|.
    du_node and du_boundary are u'(r_lambda) and u'(1).  sigma, rho, gamma
    are the rescaling radii M_+^beta r, M_-^beta r, M_-^beta s.
    """

    r_lambda: float
    s_lambda: float
    m_plus: float
    m_minus: float
    du_node: float
    du_boundary: float
    sigma: float
    rho: float
    gamma: float

    def __post_init__(self):
        if not (0.0 < self.r_lambda < self.s_lambda < 1.0):
            raise Error(
                "nodal structure violated: need 0 < r_lambda < s_lambda < 1, "
                f"got r_lambda={self.r_lambda}, s_lambda={self.s_lambda}"
            )
        if self.m_plus <= 0.0 or self.m_minus <= 0.0:
            raise Error("extrema m_plus, m_minus must be positive")
        if self.du_node >= 0.0:
            raise Error("u'(r_lambda) must be negative at the node")
        if self.du_boundary <= 0.0:
            raise Error("u'(1) must be positive (negative part returning to zero)")


def validate_lambda(params: Params, lambda1: float) -> bool:
    """True iff 0 < lambda < lambda1, the admissible range for solving.

    lambda1 is the first Dirichlet eigenvalue of the unit ball in dimension
    params.n (supplied by the bubble module).  Nonpositive lambda is rejected
    outright since the problem family is posed for lambda > 0.
    """
    if params.lam <= 0.0:
        raise NonpositiveLambda(f"lambda must be positive, got {params.lam}")
    return params.lam < lambda1
