"""Tail integrals and moments of radial weights.

Conventions: ``W(r) = ∫_r^1 w(s) ds`` is the tail integral, ``Wσ`` style
weighted tails are ``∫_r^1 s w(s) ds`` and the bare moment is
``ω_x = ∫_0^1 s^x w(s) ds``. The factor 2 of the area measure is applied by
the norm computations, never here.
"""

import logging
import math
import threading
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import attr
import numpy as np

from radial_bergman.types.config import Settings, ToolkitSettings
from radial_bergman.types.errors import AccuracyError, DomainError
from radial_bergman.types.quadrature import (
    SPLIT_RADIUS,
    Backend,
    IntegralResult,
    QuadratureSpec,
    Substitution,
    combine,
    log1m_exp,
    log_quad,
)
from radial_bergman.types.weights import ExponentialWeight, RadialWeight, check_radius

logger = logging.getLogger(__name__)

LAM_SPLIT = math.log1p(-SPLIT_RADIUS)
# beyond exp(LOG_HUGE) the exponential weight is below any representable value
LOG_HUGE = math.log(np.finfo(float).max)

# A log factor is a function of lam = ln(1 - s).
LogFactor = Callable[[float], float]


def no_factor(lam: float) -> float:
    """The constant factor 1."""
    return 0.0


def log_s(lam: float) -> float:
    """ln s for ln(1 - s) = lam."""
    return log1m_exp(lam)


def power_of_s(x: float) -> LogFactor:
    """The factor s^x."""
    if x == 0.0:
        return no_factor
    return lambda lam: x * log1m_exp(lam)


def log_weighted_integral(
    w: RadialWeight,
    r: float,
    log_factor: LogFactor,
    spec: Optional[QuadratureSpec] = None,
) -> IntegralResult:
    """Compute ln ∫_r^1 w(s) exp(log_factor(ln(1 - s))) ds by quadrature.

    The interval is split at max(r, 1/2); the part next to the boundary is
    integrated in the variable selected by the substitution policy for the
    decay class of `w`.
    """
    lam = math.log1p(-r) if r < 1.0 else -math.inf
    return log_weighted_integral_at(w, lam, log_factor, spec)


def log_weighted_integral_at(
    w: RadialWeight,
    lam: float,
    log_factor: LogFactor,
    spec: Optional[QuadratureSpec] = None,
) -> IntegralResult:
    """`log_weighted_integral` from the radius with ln(1 - r) = lam.

    Radii closer to 1 than floating point can represent stay reachable.
    """
    spec = spec or QuadratureSpec.from_settings()
    if lam == -math.inf:
        return IntegralResult(-math.inf, 0.0)
    substitution = spec.substitution(w.decay_class)

    def in_gap(u: float) -> float:
        lam = math.log(u) if u > 0.0 else -math.inf
        return w.log_density_at(lam) + log_factor(lam)

    if substitution is Substitution.gap:
        return log_quad(in_gap, 0.0, math.exp(lam), spec)

    split = min(lam, LAM_SPLIT)
    pieces: List[IntegralResult] = []
    if split < lam:
        pieces.append(log_quad(in_gap, math.exp(split), math.exp(lam), spec))

    if substitution is Substitution.logarithmic:
        # t = -ln(1 - s), ds = e^(-t) dt
        def in_log(t: float) -> float:
            return w.log_density_at(-t) + log_factor(-t) - t

        pieces.append(log_quad(in_log, -split, math.inf, spec))
    else:
        if not isinstance(w, ExponentialWeight):
            raise DomainError(
                f"exponential substitution needs an exponential weight, got {w}"
            )
        a, b, l = w.alpha, w.beta, w.l
        log_jac = -math.log(l * b)

        def in_v(v: float) -> float:
            # 1 - s^l = v^(-1/β)
            ln_v = math.log(v)
            ln_s = log1m_exp(-ln_v / b) / l
            lam = log1m_exp(ln_s)
            jac = log_jac + (1.0 / l - 1.0) * l * ln_s - (1.0 / b + 1.0) * ln_v
            return -a * v + log_factor(lam) + jac

        log_v0 = -b * w.log_gap(split)
        if log_v0 < LOG_HUGE:
            pieces.append(log_quad(in_v, math.exp(log_v0), math.inf, spec))
    return combine(pieces)


def _settings(settings: Optional[ToolkitSettings]) -> ToolkitSettings:
    return settings or Settings.get()


def _checked(
    result: IntegralResult, what: str, settings: ToolkitSettings
) -> IntegralResult:
    if not result.rel_error <= settings.moment_crossover_rel_error or math.isnan(
        result.log_value
    ):
        raise AccuracyError(
            f"{what}: quadrature did not converge"
            f" (relative error {result.rel_error:.3g})",
            estimate=result.value,
            error_bound=result.abs_error,
        )
    return result


def tail_integral_result(
    w: RadialWeight, r: float, settings: Optional[ToolkitSettings] = None
) -> IntegralResult:
    """Tail integral W(r) = ∫_r^1 w(s) ds in log form.

    Raises:
        DomainError: r outside [0, 1].
        AccuracyError: quadrature did not converge; carries the best estimate.
    """
    check_radius(r, closed=True)
    if r == 1.0:
        return IntegralResult(-math.inf, 0.0, Backend.closed_form)
    closed = w.closed_log_tail(r)
    if closed is not None:
        return IntegralResult(closed, 0.0, Backend.closed_form)
    settings = _settings(settings)
    spec = QuadratureSpec.from_settings(settings)
    result = log_weighted_integral(w, r, no_factor, spec)
    return _checked(result, f"tail of {w} at r={r}", settings)


def log_tail_integral(w: RadialWeight, r: float, settings=None) -> float:
    """ln W(r)."""
    return tail_integral_result(w, r, settings).log_value


def tail_integral(w: RadialWeight, r: float, settings=None) -> float:
    """W(r) = ∫_r^1 w(s) ds; W(1) = 0."""
    return tail_integral_result(w, r, settings).value


def weighted_tail_integral_result(
    w: RadialWeight, r: float, settings: Optional[ToolkitSettings] = None
) -> IntegralResult:
    """∫_r^1 s w(s) ds in log form."""
    check_radius(r, closed=True)
    if r == 1.0:
        return IntegralResult(-math.inf, 0.0, Backend.closed_form)
    closed = w.closed_log_weighted_tail(r)
    if closed is not None:
        return IntegralResult(closed, 0.0, Backend.closed_form)
    settings = _settings(settings)
    result = log_weighted_integral(w, r, log_s, QuadratureSpec.from_settings(settings))
    return _checked(result, f"weighted tail of {w} at r={r}", settings)


def log_weighted_tail_integral(w: RadialWeight, r: float, settings=None) -> float:
    """ln ∫_r^1 s w(s) ds."""
    return weighted_tail_integral_result(w, r, settings).log_value


def weighted_tail_integral(w: RadialWeight, r: float, settings=None) -> float:
    """∫_r^1 s w(s) ds."""
    return weighted_tail_integral_result(w, r, settings).value


def weighted_tail_integral_at_result(
    w: RadialWeight, lam: float, settings: Optional[ToolkitSettings] = None
) -> IntegralResult:
    """∫_r^1 s w(s) ds in log form for the radius with ln(1 - r) = lam ≤ 0.

    Unlike `weighted_tail_integral_result` this stays accurate where r itself
    rounds to 1.
    """
    if not lam <= 0.0:
        raise DomainError(f"ln(1 - r) must be <= 0, got {lam}")
    if lam == -math.inf:
        return IntegralResult(-math.inf, 0.0, Backend.closed_form)
    closed = w.closed_log_weighted_tail_at(lam)
    if closed is not None:
        return IntegralResult(closed, 0.0, Backend.closed_form)
    settings = _settings(settings)
    spec = QuadratureSpec.from_settings(settings)
    result = log_weighted_integral_at(w, lam, log_s, spec)
    return _checked(result, f"weighted tail of {w} at ln(1-r)={lam}", settings)


def log_weighted_tail_integral_at(w: RadialWeight, lam: float, settings=None) -> float:
    """ln ∫_r^1 s w(s) ds with ln(1 - r) = lam."""
    return weighted_tail_integral_at_result(w, lam, settings).log_value


def laplace_log_moment(w: RadialWeight, x: float) -> float:
    """Laplace-method leading term of ln ω_x, for cross-checks against quadrature.

    Raises:
        DomainError: the kind has no asymptotic form, or x is below its range.
    """
    value = w.laplace_log_moment(x)
    if value is None:
        raise DomainError(f"no Laplace asymptotic for {w} at x={x}")
    return value


def _asymptotic(
    w: RadialWeight, x: float, settings: ToolkitSettings
) -> Optional[IntegralResult]:
    value = w.laplace_log_moment(x)
    if value is None:
        return None
    return IntegralResult(value, settings.asymptotic_bracket, Backend.asymptotic)


def moment_result(
    w: RadialWeight, x: float, settings: Optional[ToolkitSettings] = None
) -> IntegralResult:
    """Moment ω_x = ∫_0^1 s^x w(s) ds in log form, choosing a backend.

    Closed forms are used when the kind has one. Otherwise the log-scaled
    quadrature is accepted when its relative error is within
    ``moment_crossover_rel_error``; past that, or past ``asymptotic_crossover``,
    exponential kinds fall back to the Laplace approximation.

    Raises:
        DomainError: x < 0.
        AccuracyError: no backend reached the requested accuracy.
    """
    if not x >= 0.0:
        raise DomainError(f"moment order must be >= 0, got {x}")
    closed = w.closed_log_moment(x)
    if closed is not None:
        return IntegralResult(closed, 0.0, Backend.closed_form)

    settings = _settings(settings)
    if x >= settings.asymptotic_crossover:
        asymptotic = _asymptotic(w, x, settings)
        if asymptotic is not None:
            return asymptotic

    spec = QuadratureSpec.from_settings(settings)
    result = log_weighted_integral(w, 0.0, power_of_s(x), spec)
    converged = result.rel_error <= settings.moment_crossover_rel_error
    if converged and result.log_value > -math.inf:
        return result

    asymptotic = _asymptotic(w, x, settings)
    if asymptotic is not None:
        logger.info(
            f"moment {x} of {w}: quadrature error {result.rel_error:.3g},"
            " using Laplace backend"
        )
        return asymptotic
    raise AccuracyError(
        f"moment {x} of {w}: quadrature did not converge"
        f" (relative error {result.rel_error:.3g})",
        estimate=result.value,
        error_bound=result.abs_error,
    )


def log_moment(w: RadialWeight, x: float, settings=None) -> float:
    """ln ω_x."""
    return moment_result(w, x, settings).log_value


def moment(w: RadialWeight, x: float, settings=None) -> float:
    """ω_x; returns 0.0 with a warning when the value underflows."""
    result = moment_result(w, x, settings)
    if result.underflow:
        logger.warning(
            f"moment {x} of {w} underflows (ln = {result.log_value:.6g}); returning 0"
        )
    return result.value


def log_moments(w: RadialWeight, xs: Iterable[float], settings=None) -> np.ndarray:
    """ln ω_x for every x in `xs`."""
    xs = np.asarray(list(xs), dtype=float)
    if np.any(xs < 0.0):
        raise DomainError("moment orders must be >= 0")
    closed = w.closed_log_moments(xs)
    if closed is not None:
        return np.asarray(closed, dtype=float)
    return np.array([log_moment(w, float(x), settings) for x in xs])


@attr.s(frozen=True)
class MomentEntry:
    """A cached moment."""

    x: float = attr.ib()
    result: IntegralResult = attr.ib()

    @property
    def log_value(self) -> float:
        """ln ω_x."""
        return self.result.log_value

    @property
    def value(self) -> float:
        """ω_x, possibly 0.0 on underflow."""
        return self.result.value

    @property
    def rel_error(self) -> float:
        """Estimated relative error."""
        return self.result.rel_error

    @property
    def backend(self) -> Backend:
        """How the value was computed."""
        return self.result.backend

    @property
    def underflow(self) -> bool:
        """Whether exp(log_value) underflows."""
        return self.result.underflow


@attr.s
class MomentTable:
    """Memoised moments of one weight.

    The cache is filled under a lock, so a table may be shared between
    threads; independent tables never share state.
    """

    weight: RadialWeight = attr.ib()
    settings: Optional[ToolkitSettings] = attr.ib(default=None)
    _entries: Dict[float, MomentEntry] = attr.ib(factory=dict, init=False, repr=False)
    _lock: threading.Lock = attr.ib(factory=threading.Lock, init=False, repr=False)

    def entry(self, x: float) -> MomentEntry:
        """Return the cached entry for order x, computing it on first use."""
        x = float(x)
        with self._lock:
            cached = self._entries.get(x)
        if cached is not None:
            return cached
        entry = MomentEntry(x, moment_result(self.weight, x, self.settings))
        with self._lock:
            return self._entries.setdefault(x, entry)

    def log_value(self, x: float) -> float:
        """Cached ln ω_x."""
        return self.entry(x).log_value

    def value(self, x: float) -> float:
        """Cached ω_x."""
        return self.entry(x).value

    def fill(self, xs: Iterable[float]) -> "MomentTable":
        """Precompute a batch of orders, vectorised when a closed form exists."""
        xs = [float(x) for x in xs]
        closed = self.weight.closed_log_moments(np.asarray(xs)) if xs else None
        if closed is not None:
            with self._lock:
                for x, value in zip(xs, closed):
                    result = IntegralResult(float(value), 0.0, Backend.closed_form)
                    self._entries.setdefault(x, MomentEntry(x, result))
        else:
            for x in xs:
                self.entry(x)
        return self

    def log_values(self, xs: Iterable[float]) -> np.ndarray:
        """ln ω_x for every x in xs, computed in one pass where possible."""
        xs = list(xs)
        self.fill(xs)
        return np.array([self.log_value(x) for x in xs])

    def entries(self) -> List[MomentEntry]:
        """All cached entries ordered by x."""
        with self._lock:
            return [self._entries[x] for x in sorted(self._entries)]

    def check_invariants(self, rel_tol: float = 1e-9) -> List[Tuple[str, float]]:
        """Return violations of monotonicity and log-convexity among cached orders.

        Orders are checked in consecutive pairs (monotone non-increasing) and
        consecutive equally spaced triples (log-convex).
        """
        entries = self.entries()
        violations: List[Tuple[str, float]] = []
        for a, b in zip(entries, entries[1:]):
            if b.log_value > a.log_value + rel_tol:
                violations.append(("monotonicity", b.x))
        for a, b, c in zip(entries, entries[1:], entries[2:]):
            if not math.isclose(b.x - a.x, c.x - b.x):
                continue
            if 2.0 * b.log_value > a.log_value + c.log_value + rel_tol:
                violations.append(("log_convexity", b.x))
        return violations
