"""Log-space adaptive quadrature with endpoint substitutions near r = 1.

Every integral of the toolkit has the form ``∫_r^1 w(s) exp(g(s)) ds``. Radial
densities are evaluated through ``lam = ln(1 - s)`` so that the boundary layer
at ``s -> 1`` never loses digits, and integrals are returned as logarithms so
that exponential-weight moments never underflow.
"""

import logging
import math
import warnings
from enum import Enum
from typing import Callable, Dict, Iterable, Optional, Tuple

import attr
import numpy as np
from scipy import integrate, optimize
from scipy.special import logsumexp

from radial_bergman.types.config import Settings, ToolkitSettings

logger = logging.getLogger(__name__)

LogIntegrand = Callable[[float], float]

# Below this radius no substitution is needed; integrals are split there.
SPLIT_RADIUS = 0.5

LOG_TINY = math.log(np.finfo(float).tiny)


class DecayClass(str, Enum):
    """Boundary behaviour of a density, steering the substitution near r = 1."""

    polynomial = "polynomial"
    exponential = "exponential"
    blowup = "blowup"
    generic = "generic"


class Substitution(str, Enum):
    """Change of variables applied on [max(r, 1/2), 1)."""

    # u = 1 - s on a finite interval, QUADPACK extrapolates the algebraic endpoint.
    gap = "gap"
    # v = (1 - s^l)^(-beta): the exponential singularity becomes exp(-alpha v).
    exponential = "exponential"
    # t = -ln(1 - s) on a half-line.
    logarithmic = "logarithmic"


class Backend(str, Enum):
    """How a value was obtained."""

    quadrature = "quadrature"
    closed_form = "closed_form"
    asymptotic = "asymptotic"


DEFAULT_POLICY: Dict[DecayClass, Substitution] = {
    DecayClass.polynomial: Substitution.gap,
    DecayClass.exponential: Substitution.exponential,
    DecayClass.blowup: Substitution.logarithmic,
    DecayClass.generic: Substitution.logarithmic,
}


def _positive(instance, attribute, value):
    if not value > 0:
        raise ValueError(f"{attribute.name} must be > 0, got {value}")


def _total_policy(instance, attribute, value):
    missing = [c.value for c in DecayClass if c not in value]
    if missing:
        raise ValueError(f"substitution policy has no entry for {missing}")


@attr.s(frozen=True)
class QuadratureSpec:
    """Tolerances and the endpoint-substitution policy of the quadrature engine.

    Attributes:
        rel_tol: relative tolerance handed to QUADPACK.
        abs_floor: absolute tolerance floor (the integrand is peak-scaled to 1).
        max_subdivisions: subdivision limit per subinterval.
        policy: substitution for every decay class.
    """

    rel_tol: float = attr.ib(default=1e-12, validator=_positive)
    abs_floor: float = attr.ib(default=1e-300, validator=_positive)
    max_subdivisions: int = attr.ib(default=200, validator=_positive)
    policy: Dict[DecayClass, Substitution] = attr.ib(
        default=attr.Factory(lambda: dict(DEFAULT_POLICY)),
        validator=_total_policy,
        hash=False,
    )

    @classmethod
    def from_settings(
        cls, settings: Optional[ToolkitSettings] = None
    ) -> "QuadratureSpec":
        """Build the spec from the toolkit settings."""
        settings = settings or Settings.get()
        return cls(
            rel_tol=settings.quad_rel_tol,
            abs_floor=settings.quad_abs_floor,
            max_subdivisions=settings.quad_max_subdivisions,
        )

    def substitution(self, decay_class: DecayClass) -> Substitution:
        """Return the substitution used for `decay_class`."""
        return self.policy[decay_class]


@attr.s(frozen=True)
class IntegralResult:
    """Logarithm of a positive integral with its relative error estimate."""

    log_value: float = attr.ib()
    rel_error: float = attr.ib(default=0.0)
    backend: Backend = attr.ib(default=Backend.quadrature)

    @property
    def underflow(self) -> bool:
        """True when the plain value is not representable as a normal double."""
        return self.log_value < LOG_TINY

    @property
    def value(self) -> float:
        """Plain value; 0.0 when it underflows (see `underflow`)."""
        if self.underflow:
            return 0.0
        return math.exp(self.log_value)

    @property
    def abs_error(self) -> float:
        """Absolute error estimate of `value`."""
        return self.value * self.rel_error


def safe_exp(x: float) -> float:
    """Exponential saturating to inf instead of raising."""
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def log1m_exp(lam: float) -> float:
    """Return ln(1 - e^lam) for lam <= 0 without cancellation."""
    if lam >= 0.0:
        return -math.inf
    if lam > -0.6931471805599453:
        return math.log(-math.expm1(lam))
    return math.log1p(-math.exp(lam))


def _finite_or_floor(value: float) -> float:
    if value != value or value == math.inf:
        return -math.inf
    return value


def _locate_peak(log_f: LogIntegrand, a: float, b: float) -> Tuple[float, float]:
    """Locate the maximum of `log_f` on [a, b] (b may be infinite)."""
    if math.isfinite(b):
        offsets = (b - a) * np.logspace(-12, 0, 97)
        candidates = np.concatenate(([a], a + offsets, b - offsets))
    else:
        candidates = np.concatenate(([a], a + np.logspace(-8, 7, 151)))
    candidates = np.unique(np.clip(candidates, a, b))
    values = np.array([_finite_or_floor(log_f(float(t))) for t in candidates])
    i = int(np.argmax(values))
    if values[i] == -math.inf:
        return a, -math.inf

    lo = float(candidates[max(i - 1, 0)])
    hi = float(candidates[min(i + 1, len(candidates) - 1)])
    best_t, best_v = float(candidates[i]), float(values[i])
    if hi > lo:

        def objective(t: float) -> float:
            v = _finite_or_floor(log_f(t))
            return 1e300 if v == -math.inf else -v

        res = optimize.minimize_scalar(
            objective,
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-13 * max(1.0, abs(best_t))},
        )
        if res.success and -res.fun > best_v:
            best_t, best_v = float(res.x), float(-res.fun)
    return best_t, best_v


def _half_width(
    log_f: LogIntegrand, peak: float, top: float, limit: float, direction: float
) -> Optional[float]:
    """Distance from the peak at which `log_f` has dropped by one unit."""
    step = max(1e-14, 1e-12 * abs(peak))
    while step < 1e8:
        t = peak + direction * step
        if (direction > 0 and t >= limit) or (direction < 0 and t <= limit):
            return None
        if _finite_or_floor(log_f(t)) < top - 1.0:
            return step
        step *= 2.0
    return None


def _breakpoints(log_f: LogIntegrand, a: float, b: float, peak: float, top: float):
    points = [a]
    left = _half_width(log_f, peak, top, a, -1.0) if peak > a else None
    if left is not None and peak - 20.0 * left > a:
        points.append(peak - 20.0 * left)
    if a < peak < b:
        points.append(peak)
    right = _half_width(log_f, peak, top, b, 1.0) if peak < b else None
    if right is not None and peak + 20.0 * right < b:
        points.append(peak + 20.0 * right)
    points.append(b)
    return points


def log_quad(
    log_f: LogIntegrand, a: float, b: float, spec: Optional[QuadratureSpec] = None
) -> IntegralResult:
    """Compute ln ∫_a^b exp(log_f(t)) dt.

    The integrand is scaled by its maximum before integration and the interval
    is split at the peak and at twenty half-widths on each side of it, so that
    sharply concentrated integrands (large-exponent moments) are resolved.
    """
    spec = spec or QuadratureSpec.from_settings()
    if not b > a:
        return IntegralResult(-math.inf, 0.0)
    peak, top = _locate_peak(log_f, a, b)
    if top == -math.inf:
        return IntegralResult(-math.inf, 0.0)

    def scaled(t: float) -> float:
        v = log_f(t)
        if v != v:
            return 0.0
        return safe_exp(v - top)

    total = 0.0
    error = 0.0
    points = _breakpoints(log_f, a, b, peak, top)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        for lo, hi in zip(points[:-1], points[1:]):
            if not hi > lo:
                continue
            val, err = integrate.quad(
                scaled,
                lo,
                hi,
                epsabs=spec.abs_floor,
                epsrel=spec.rel_tol,
                limit=spec.max_subdivisions,
            )
            total += val
            error += err
    for w in caught:
        logger.debug(f"quadrature on [{a}, {b}]: {w.message}")
    if not total > 0:
        return IntegralResult(-math.inf, 0.0)
    return IntegralResult(top + math.log(total), error / total)


def combine(results: Iterable[IntegralResult]) -> IntegralResult:
    """Sum integrals given in log form, propagating relative errors."""
    results = [r for r in results if r.log_value > -math.inf]
    if not results:
        return IntegralResult(-math.inf, 0.0)
    logs = np.array([r.log_value for r in results])
    total = float(logsumexp(logs))
    shares = np.exp(logs - total)
    error = float(sum(s * r.rel_error for s, r in zip(shares, results)))
    backends = {r.backend for r in results}
    backend = backends.pop() if len(backends) == 1 else Backend.quadrature
    return IntegralResult(total, error, backend)
