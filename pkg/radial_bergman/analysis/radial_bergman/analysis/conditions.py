"""The D_p, A_p and M_p boundedness criteria as sampled profiles.

Every quotient is computed in log space. A profile never proves a supremum is
finite; `classify_trend` only labels what the samples show.
"""

import logging
import math
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import attr
import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import logsumexp

from radial_bergman.analysis.classes import (
    ClassName,
    Verdict,
    default_radii,
    dhat_profile,
    m_profile,
)
from radial_bergman.types.config import Settings, ToolkitSettings
from radial_bergman.types.errors import AccuracyError, DomainError, NotAWeightError
from radial_bergman.types.moments import (
    MomentTable,
    log_weighted_tail_integral,
    log_weighted_tail_integral_at,
    weighted_tail_integral_result,
)
from radial_bergman.types.quadrature import LOG_TINY, QuadratureSpec, log1m_exp, log_quad
from radial_bergman.types.weights import RadialWeight, check_radius, sigma_weight

logger = logging.getLogger(__name__)

# Late growth rate may fall this far below the mid-profile rate and still count
# as sustained growth.
RATE_MARGIN = 0.9

MIN_TREND_SAMPLES = 30

SIGMA_NOT_A_WEIGHT = "sigma_not_a_weight"


class Criterion(str, Enum):
    """Boundedness criteria."""

    Dp = "Dp"
    Ap = "Ap"
    Mp = "Mp"


class Trend(str, Enum):
    """Trend verdicts."""

    bounded = "bounded"
    diverging = "diverging"
    inconclusive = "inconclusive"


@attr.s(frozen=True)
class TrendVerdict:
    """Trend of a profile with the statistics that decided it.

    Rates are slopes of the log-profile against its natural scale, ln(n+1)
    for D_p and ln(1/(1-r)) for A_p and M_p.
    """

    trend: Trend = attr.ib()
    late_rate: float = attr.ib(default=math.nan)
    early_rate: float = attr.ib(default=math.nan)
    growth: float = attr.ib(default=math.nan)
    reason: str = attr.ib(default="")


@attr.s(frozen=True)
class ConditionProfile:
    """A sampled criterion quotient.

    `axis` holds the indices n (D_p) or the radii r (A_p, M_p); values are
    stored as logarithms with their relative error estimates.
    """

    criterion: Criterion = attr.ib()
    p: float = attr.ib()
    axis: Tuple[float, ...] = attr.ib(converter=tuple)
    log_values: Tuple[float, ...] = attr.ib(converter=tuple)
    rel_errors: Tuple[float, ...] = attr.ib(converter=tuple)
    trend: TrendVerdict = attr.ib()

    @property
    def values(self) -> np.ndarray:
        """The sequence on the linear scale."""
        return np.exp(np.asarray(self.log_values, dtype=float))

    @property
    def sup_estimate(self) -> float:
        """max of the sampled values; inf for a σ that is not a weight."""
        if self.trend.reason == SIGMA_NOT_A_WEIGHT:
            return math.inf
        if not self.log_values:
            return math.nan
        return float(np.exp(np.max(self.log_values)))

    @property
    def reason(self) -> str:
        """Explanation of the trend verdict."""
        return self.trend.reason


def _scale(criterion: Criterion, axis: np.ndarray) -> np.ndarray:
    if criterion is Criterion.Dp:
        return np.log1p(axis)
    return -np.log1p(-axis)


def _rate(log_values: np.ndarray, scale: np.ndarray) -> float:
    span = scale[-1] - scale[0]
    if span <= 0:
        return math.nan
    return float((log_values[-1] - log_values[0]) / span)


def classify_trend(
    profile: Union[ConditionProfile, Sequence[float]],
    settings: Optional[ToolkitSettings] = None,
) -> TrendVerdict:
    """Label a profile bounded, diverging or inconclusive.

    A plain sequence is read as D_p values indexed by n = 0, 1, ...

    Diverging needs a monotone increase over the last window together with
    either sustained growth (the late rate against the natural scale is not
    below the mid-profile rate) or growth past the configured ceiling.
    Bounded needs a relative variation of less than
    ``trend_bounded_variation`` over the last window.
    """
    settings = settings or Settings.get()
    if isinstance(profile, ConditionProfile):
        log_values = np.asarray(profile.log_values, dtype=float)
        axis = np.asarray(profile.axis, dtype=float)
        criterion = profile.criterion
    else:
        log_values = np.log(np.asarray(profile, dtype=float))
        axis = np.arange(len(log_values), dtype=float)
        criterion = Criterion.Dp

    n = len(log_values)
    if n < MIN_TREND_SAMPLES:
        return TrendVerdict(
            Trend.inconclusive, reason=f"{n} samples, at least {MIN_TREND_SAMPLES} needed"
        )
    window = min(settings.trend_window, n)
    scale = _scale(criterion, axis)
    last = log_values[-window:]
    growth = float(last[-1] - last[0])
    late_rate = _rate(last, scale[-window:])
    mid = max(0, n // 2 - window // 2)
    early_rate = _rate(log_values[mid : mid + window], scale[mid : mid + window])

    monotone = bool(np.all(np.diff(last) > 0.0)) and growth > settings.trend_noise_floor
    sustained = early_rate <= 0.0 or late_rate >= RATE_MARGIN * early_rate
    ceiling = log_values[-1] - log_values[0] >= math.log(settings.trend_ceiling_factor)
    if monotone and (sustained or ceiling):
        trend, reason = Trend.diverging, "monotone growth over the last window"
    elif math.expm1(float(np.ptp(last))) < settings.trend_bounded_variation:
        trend, reason = Trend.bounded, "flat over the last window"
    else:
        trend, reason = Trend.inconclusive, "neither flat nor steadily growing"
    return TrendVerdict(trend, late_rate, early_rate, growth, reason)


def _profile(
    criterion: Criterion,
    p: float,
    axis: Sequence[float],
    log_values: Sequence[float],
    rel_errors: Sequence[float],
    settings: ToolkitSettings,
    failure: Optional[str] = None,
) -> ConditionProfile:
    profile = ConditionProfile(
        criterion, p, axis, log_values, rel_errors, TrendVerdict(Trend.inconclusive)
    )
    if failure is not None:
        trend = TrendVerdict(Trend.inconclusive, reason=failure)
    else:
        trend = classify_trend(profile, settings)
    logger.info(f"{criterion.value} profile: {trend.trend.value} ({trend.reason})")
    return attr.evolve(profile, trend=trend)


def _not_a_weight(
    criterion: Criterion, p: float, error: NotAWeightError
) -> ConditionProfile:
    logger.info(f"{criterion.value}: {error}")
    trend = TrendVerdict(Trend.diverging, reason=SIGMA_NOT_A_WEIGHT)
    return ConditionProfile(criterion, p, (), (), (), trend)


def _conjugate(p: float) -> float:
    return p / (p - 1.0)


def dp_sequence(
    omega: RadialWeight,
    nu: RadialWeight,
    p: float,
    N: int,
    settings: Optional[ToolkitSettings] = None,
    dense: bool = False,
    tables: Optional[Dict[RadialWeight, MomentTable]] = None,
) -> ConditionProfile:
    """D_p quotient ν_{np+1}^{1/p} σ_{np'+1}^{1/p'} / ω_{2n+1} for n = 0..N.

    With `dense` the quotient is also sampled at quarter-integer n. Moment
    tables may be passed in to share moments between calls.

    Raises:
        DomainError: p outside (1, ∞) or N < 0.
    """
    settings = settings or Settings.get()
    if N < 0:
        raise DomainError(f"N must be >= 0, got {N}")
    try:
        sigma = sigma_weight(omega, nu, p)
    except NotAWeightError as e:
        return _not_a_weight(Criterion.Dp, p, e)
    q = _conjugate(p)
    tables = {} if tables is None else tables
    for w in (omega, nu, sigma):
        tables.setdefault(w, MomentTable(w, settings))

    ns = np.arange(0, N + 0.125, 0.25 if dense else 1.0)
    log_values: List[float] = []
    rel_errors: List[float] = []
    failure = None
    try:
        tables[nu].fill(ns * p + 1.0)
        tables[sigma].fill(ns * q + 1.0)
        tables[omega].fill(2.0 * ns + 1.0)
        for n in ns:
            a = tables[nu].entry(n * p + 1.0)
            b = tables[sigma].entry(n * q + 1.0)
            c = tables[omega].entry(2.0 * n + 1.0)
            log_values.append(a.log_value / p + b.log_value / q - c.log_value)
            rel_errors.append(a.rel_error / p + b.rel_error / q + c.rel_error)
    except AccuracyError as e:
        failure = f"moment failure after {len(log_values)} samples: {e}"
        logger.warning(f"D_p profile: {failure}")
    return _profile(
        Criterion.Dp, p, ns[: len(log_values)], log_values, rel_errors, settings, failure
    )


def _radii(
    w: RadialWeight, radii: Optional[Sequence[float]], settings: ToolkitSettings
) -> np.ndarray:
    if radii is None:
        return np.concatenate(([0.0], default_radii(w, settings)))
    radii = np.asarray(radii, dtype=float)
    for r in radii:
        check_radius(r)
    return radii


def ap_profile(
    omega: RadialWeight,
    nu: RadialWeight,
    p: float,
    radii: Optional[Sequence[float]] = None,
    settings: Optional[ToolkitSettings] = None,
) -> ConditionProfile:
    """A_p quotient (∫_r^1 νt dt)^{1/p} (∫_r^1 σt dt)^{1/p'} / ∫_r^1 ωt dt.

    The default grid is r = 0 followed by the class-test radii of σ, ω and ν
    combined (geometric in 1 - r).
    """
    settings = settings or Settings.get()
    try:
        sigma = sigma_weight(omega, nu, p)
    except NotAWeightError as e:
        return _not_a_weight(Criterion.Ap, p, e)
    q = _conjugate(p)
    radii = _radii(_coarsest(omega, nu, sigma, settings=settings), radii, settings)
    log_values: List[float] = []
    rel_errors: List[float] = []
    failure = None
    try:
        for r in radii:
            a = weighted_tail_integral_result(nu, r, settings)
            b = weighted_tail_integral_result(sigma, r, settings)
            c = weighted_tail_integral_result(omega, r, settings)
            log_values.append(a.log_value / p + b.log_value / q - c.log_value)
            rel_errors.append(a.rel_error / p + b.rel_error / q + c.rel_error)
    except AccuracyError as e:
        failure = f"tail failure after {len(log_values)} samples: {e}"
        logger.warning(f"A_p profile: {failure}")
    return _profile(
        Criterion.Ap,
        p,
        radii[: len(log_values)],
        log_values,
        rel_errors,
        settings,
        failure,
    )


def _coarsest(*weights: RadialWeight, settings: ToolkitSettings) -> RadialWeight:
    """The weight whose default grid stops furthest from the boundary."""
    return max(weights, key=lambda w: 1.0 - default_radii(w, settings)[-1])


def _gauss_legendre_panels(a: float, b: float, panels: int, order: int = 16):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    wt = (half[:, None] * weights[None, :]).ravel()
    return t, wt


def _log_tail_in_t(
    omega: RadialWeight, edges: np.ndarray, settings: ToolkitSettings
) -> Callable[[np.ndarray], np.ndarray]:
    """ln ∫_s^1 ω(x) x dx as a function of t = -ln(1 - s) on [edges[0], edges[-1]].

    Closed forms are used directly. Otherwise the tail is sampled at every
    edge and three points inside each interval and a cubic spline in t
    interpolates the samples.
    """

    def direct(t: np.ndarray) -> np.ndarray:
        return np.array(
            [log_weighted_tail_integral(omega, -math.expm1(-x), settings) for x in t]
        )

    if omega.closed_log_weighted_tail(0.5) is not None or len(edges) < 2:
        return direct
    knots = np.unique(
        np.concatenate([np.linspace(a, b, 5) for a, b in zip(edges[:-1], edges[1:])])
    )
    return CubicSpline(knots, direct(knots))


def mp_profile(
    omega: RadialWeight,
    nu: RadialWeight,
    p: float,
    radii: Optional[Sequence[float]] = None,
    settings: Optional[ToolkitSettings] = None,
) -> ConditionProfile:
    """M_p quotient (∫_0^r ν(s)s / (∫_s^1 ωt dt)^p ds + 1)^{1/p} (∫_r^1 σt dt)^{1/p'}.

    The inner integral is accumulated over the grid. Each grid interval is
    integrated in t = -ln(1 - s) with Gauss-Legendre panels, more panels where
    the log-integrand changes fast.
    """
    settings = settings or Settings.get()
    try:
        sigma = sigma_weight(omega, nu, p)
    except NotAWeightError as e:
        return _not_a_weight(Criterion.Mp, p, e)
    q = _conjugate(p)
    radii = _radii(_coarsest(omega, nu, sigma, settings=settings), radii, settings)
    t_grid = -np.log1p(-radii)

    log_tail = _log_tail_in_t(omega, np.unique(np.concatenate(([0.0], t_grid))), settings)

    def log_integrand(t: np.ndarray) -> np.ndarray:
        lam = -t
        log_nu = np.array([nu.log_density_at(x) for x in lam])
        log_s = np.array([log1m_exp(x) for x in lam])
        return log_nu + log_s - p * np.asarray(log_tail(t)) - t

    log_values: List[float] = []
    rel_errors: List[float] = []
    failure = None
    log_inner = -math.inf
    previous = 0.0
    try:
        for r, t in zip(radii, t_grid):
            if t > previous:
                ends = log_integrand(np.array([previous, t]))
                finite = ends[np.isfinite(ends)]
                spread = float(np.ptp(finite)) if len(finite) else 0.0
                panels = int(min(512, max(4, math.ceil(spread))))
                nodes, wts = _gauss_legendre_panels(previous, t, panels)
                piece = float(logsumexp(log_integrand(nodes), b=wts))
                log_inner = float(np.logaddexp(log_inner, piece))
                previous = t
            tail = weighted_tail_integral_result(sigma, r, settings)
            log_values.append(np.logaddexp(log_inner, 0.0) / p + tail.log_value / q)
            rel_errors.append(tail.rel_error / q)
    except AccuracyError as e:
        failure = f"tail failure after {len(log_values)} samples: {e}"
        logger.warning(f"M_p profile: {failure}")
    return _profile(
        Criterion.Mp,
        p,
        radii[: len(log_values)],
        log_values,
        rel_errors,
        settings,
        failure,
    )


@attr.s(frozen=True)
class HolderFloorReport:
    """Smallest slack of the two quotients that Hölder's inequality keeps above 1."""

    ap_slack: float = attr.ib()
    dp_slack: float = attr.ib()

    @property
    def worst(self) -> float:
        """Smaller of the two slacks."""
        return min(self.ap_slack, self.dp_slack)

    def holds(self, tol: float = 1e-9) -> bool:
        """Whether both lower bounds hold up to tol."""
        return self.worst >= -tol


def holder_floor_check(
    omega: RadialWeight,
    nu: RadialWeight,
    p: float,
    radii: Optional[Sequence[float]] = None,
    N: int = 100,
    settings: Optional[ToolkitSettings] = None,
) -> HolderFloorReport:
    """Slack of A_p(ω, ν) - 1 over the radii and of D_p(ω, ω) - 1 over n ≤ N.

    Raises:
        NotAWeightError: σ is not a weight.
    """
    settings = settings or Settings.get()
    sigma_weight(omega, nu, p)
    ap = ap_profile(omega, nu, p, radii, settings)
    dp = dp_sequence(omega, omega, p, N, settings)
    ap_slack = float(np.min(np.expm1(ap.log_values))) if ap.log_values else math.nan
    dp_slack = float(np.min(np.expm1(dp.log_values))) if dp.log_values else math.nan
    report = HolderFloorReport(ap_slack, dp_slack)
    if not report.holds():
        logger.warning(f"Hölder floor violated: worst slack {report.worst:.3g}")
    return report


@attr.s(frozen=True)
class IdentityCheckReport:
    """Both sides of ∫_t^1 (ω/h)^{p'} s ds = p' (∫_t^1 σ s ds)^{1/p'} per t."""

    t_values: Tuple[float, ...] = attr.ib(converter=tuple)
    lhs: Tuple[float, ...] = attr.ib(converter=tuple)
    rhs: Tuple[float, ...] = attr.ib(converter=tuple)
    skipped: Tuple[float, ...] = attr.ib(default=(), converter=tuple)

    @property
    def rel_errors(self) -> np.ndarray:
        """Relative error of each side-by-side pair."""
        lhs, rhs = np.asarray(self.lhs), np.asarray(self.rhs)
        return np.abs(lhs - rhs) / np.abs(rhs)

    @property
    def max_rel_error(self) -> float:
        """Largest relative error, nan when nothing was compared."""
        return float(np.max(self.rel_errors)) if self.lhs else math.nan


def integration_identity_check(
    omega: RadialWeight,
    nu: RadialWeight,
    p: float,
    t_values: Sequence[float] = (0.0, 0.5, 0.9),
    settings: Optional[ToolkitSettings] = None,
) -> IdentityCheckReport:
    """Compare both sides of the integration identity for the auxiliary
    h(s) = ν(s)^{1/p} (∫_s^1 σ(x) x dx)^{1/(pp')}.

    The left side is integrated in τ = -ln(1 - s), where (ω/h)^{p'} s equals
    σ(s) s (∫_s^1 σ x dx)^{-1/p}. Points where the σ tail underflows are
    skipped with a warning.

    Raises:
        NotAWeightError: σ is not a weight.
    """
    settings = settings or Settings.get()
    sigma = sigma_weight(omega, nu, p)
    q = _conjugate(p)
    spec = QuadratureSpec.from_settings(settings)

    def log_integrand(tau: float) -> float:
        if tau <= 0.0:
            return -math.inf
        lam = -tau
        tail = log_weighted_tail_integral_at(sigma, lam, settings)
        if tail == -math.inf:
            return -math.inf
        return sigma.log_density_at(lam) + log1m_exp(lam) - tail / p - tau

    kept: List[float] = []
    lhs: List[float] = []
    rhs: List[float] = []
    skipped: List[float] = []
    for t in t_values:
        check_radius(t)
        log_tail = log_weighted_tail_integral(sigma, t, settings)
        if log_tail < LOG_TINY:
            logger.warning(f"integration identity: σ tail underflows at t={t}; skipped")
            skipped.append(t)
            continue
        left = log_quad(log_integrand, -math.log1p(-t), math.inf, spec)
        kept.append(t)
        lhs.append(left.value)
        rhs.append(q * math.exp(log_tail / q))
    return IdentityCheckReport(kept, lhs, rhs, skipped)


@attr.s(frozen=True)
class TransferCheck:
    """One class-transfer statement tested on a pair."""

    name: str = attr.ib()
    applicable: bool = attr.ib()
    passed: bool = attr.ib()
    detail: str = attr.ib(default="")


@attr.s(frozen=True)
class TransferReport:
    """Sub-checks (a) D_p/A_p trend agreement when ω ∈ D̂, (b) D̂ of ω and ν
    agree when D_p is bounded, (c) M transfers from ν to ω when D_p is bounded."""

    checks: Tuple[TransferCheck, ...] = attr.ib(converter=tuple)
    dp_trend: Trend = attr.ib()
    ap_trend: Trend = attr.ib()

    @property
    def passed(self) -> bool:
        """Whether every applicable check passed."""
        return all(c.passed for c in self.checks if c.applicable)


def class_transfer_checks(
    omega: RadialWeight,
    nu: RadialWeight,
    p: float,
    N: int = 200,
    settings: Optional[ToolkitSettings] = None,
) -> TransferReport:
    """Cross-check the criteria against the class verdicts of ω and ν."""
    settings = settings or Settings.get()
    dp = dp_sequence(omega, nu, p, N, settings)
    ap = ap_profile(omega, nu, p, settings=settings)
    dhat_omega = dhat_profile(omega, settings=settings).verdict
    dhat_nu = dhat_profile(nu, settings=settings).verdict
    dp_bounded = dp.trend.trend is Trend.bounded

    agree = dp.trend.trend is ap.trend.trend
    checks = [
        TransferCheck(
            "dp_ap_agree",
            dhat_omega is Verdict.likely_member,
            agree,
            f"D_p {dp.trend.trend.value}, A_p {ap.trend.trend.value}",
        ),
        TransferCheck(
            "dhat_transfer",
            dp_bounded,
            dhat_omega is dhat_nu,
            f"{ClassName.Dhat.value}: ω {dhat_omega.value}, ν {dhat_nu.value}",
        ),
    ]
    m_nu = m_profile(nu, settings=settings).verdict if dp_bounded else None
    if m_nu is Verdict.likely_member:
        m_omega = m_profile(omega, settings=settings).verdict
        checks.append(
            TransferCheck(
                "m_transfer",
                True,
                m_omega is Verdict.likely_member,
                f"{ClassName.Mclass.value}: ω {m_omega.value}",
            )
        )
    else:
        skipped = TransferCheck("m_transfer", False, True, "ν not a likely member of M")
        checks.append(skipped)
    report = TransferReport(checks, dp.trend.trend, ap.trend.trend)
    for check in checks:
        if check.applicable and not check.passed:
            logger.warning(f"class transfer {check.name} failed: {check.detail}")
    return report


__all__ = [
    "ConditionProfile",
    "Criterion",
    "HolderFloorReport",
    "IdentityCheckReport",
    "TransferCheck",
    "TransferReport",
    "Trend",
    "TrendVerdict",
    "ap_profile",
    "class_transfer_checks",
    "classify_trend",
    "dp_sequence",
    "holder_floor_check",
    "integration_identity_check",
    "mp_profile",
]
