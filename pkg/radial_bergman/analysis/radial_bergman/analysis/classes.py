"""Numerical membership tests for the weight classes D̂, Ď, D and M.

Membership is an asymptotic statement, so every verdict is a "likely" one
read off the last decade of a geometric grid, with an inconclusive fallback.
"""

import logging
import math
from enum import Enum
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import attr
import numpy as np

from radial_bergman.types.config import Settings, ToolkitSettings
from radial_bergman.types.errors import DomainError, PreconditionError
from radial_bergman.types.moments import MomentTable, tail_integral_result
from radial_bergman.types.quadrature import DecayClass, log1m_exp
from radial_bergman.types.weights import CompositeWeight, RadialWeight

logger = logging.getLogger(__name__)

# the D̂ test reads its verdict off radii reaching at least this far
MIN_OUTER_RADIUS = 0.999


class ClassName(str, Enum):
    """Weight classes."""

    Dhat = "Dhat"
    Dcheck = "Dcheck"
    Mclass = "Mclass"
    D = "D"


class Verdict(str, Enum):
    """Outcome of a membership test."""

    likely_member = "likely_member"
    likely_nonmember = "likely_nonmember"
    inconclusive = "inconclusive"


class Axis(str, Enum):
    """What the evidence grid samples."""

    radius = "radius"
    exponent = "exponent"


@attr.s(frozen=True)
class ClassMembershipReport:
    """Verdict of a class test with the evidence backing it.

    Ratios are stored as logarithms; `ratios` gives the plain values and
    `rel_errors` the estimated relative error of each ratio.
    """

    class_name: ClassName = attr.ib()
    verdict: Verdict = attr.ib()
    estimated_constants: Dict[str, float] = attr.ib(factory=dict)
    axis_kind: Axis = attr.ib(default=Axis.radius)
    axis: Tuple[float, ...] = attr.ib(default=(), converter=tuple)
    log_ratios: Tuple[float, ...] = attr.ib(default=(), converter=tuple)
    components: Tuple["ClassMembershipReport", ...] = attr.ib(default=(), converter=tuple)
    notes: Tuple[str, ...] = attr.ib(default=(), converter=tuple)
    rel_errors: Tuple[float, ...] = attr.ib(default=(), converter=tuple)

    @property
    def ratios(self) -> np.ndarray:
        """The ratios on the linear scale."""
        return np.exp(np.asarray(self.log_ratios, dtype=float))

    @property
    def is_member(self) -> bool:
        """Whether the verdict is likely_member."""
        return self.verdict is Verdict.likely_member


def _has_exponential_boundary(w: RadialWeight) -> bool:
    if w.decay_class is DecayClass.exponential:
        return True
    if isinstance(w, CompositeWeight):
        return any(_has_exponential_boundary(f) for f, _ in w.factors)
    return False


def default_radii(
    w: RadialWeight, settings: Optional[ToolkitSettings] = None
) -> np.ndarray:
    """Radii geometric in 1 - r from 0.5 down to the configured minimal gap."""
    settings = settings or Settings.get()
    min_gap = settings.exp_min_gap if _has_exponential_boundary(w) else settings.min_gap
    decades = math.log10(0.5 / min_gap)
    count = int(round(decades * settings.points_per_decade)) + 1
    return 1.0 - np.logspace(math.log10(0.5), math.log10(min_gap), count)


def default_exponents(settings: Optional[ToolkitSettings] = None) -> np.ndarray:
    """Exponents geometric from 1 to the configured maximum."""
    settings = settings or Settings.get()
    decades = math.log10(settings.max_exponent)
    count = int(round(decades * settings.points_per_decade)) + 1
    return np.logspace(0.0, decades, count)


def _check_radii(radii: Sequence[float]) -> np.ndarray:
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or len(radii) < 2:
        raise PreconditionError("the radii grid needs at least two points")
    if np.any(np.diff(radii) <= 0) or radii[0] < 0 or radii[-1] >= 1:
        raise PreconditionError("the radii grid must be strictly increasing in [0, 1)")
    return radii


def _check_exponents(xs: Sequence[float]) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 1 or len(xs) < 2:
        raise PreconditionError("the exponent grid needs at least two points")
    if np.any(np.diff(xs) <= 0) or xs[0] < 1:
        raise PreconditionError(
            "the exponent grid must be strictly increasing in [1, inf)"
        )
    return xs


def _log_tails(
    w: RadialWeight, radii: np.ndarray, settings: ToolkitSettings
) -> Tuple[np.ndarray, np.ndarray]:
    """ln ω̂ at every radius, with the relative error of each value."""
    results = [tail_integral_result(w, float(r), settings) for r in radii]
    return (
        np.array([r.log_value for r in results]),
        np.array([r.rel_error for r in results]),
    )


def _log_moments(table: MomentTable, xs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    logs = table.log_values(xs)
    return logs, np.array([table.entry(x).rel_error for x in xs])


def _last_decade(scale: np.ndarray) -> np.ndarray:
    mask = scale >= scale[-1] / 10.0
    if mask.sum() < 2:
        mask[-2:] = True
    return mask


def _slope_per_decade(scale: np.ndarray, values: np.ndarray) -> float:
    if not np.all(np.isfinite(values)):
        return -math.inf
    if np.ptp(values) == 0.0:
        return 0.0
    return float(np.polyfit(np.log10(scale), values, 1)[0])


def _log_gap(log_ratio: np.ndarray) -> np.ndarray:
    """ln(ratio - 1) from ln(ratio), -inf where ratio <= 1."""
    return np.array([L + log1m_exp(-L) if L > 0 else -math.inf for L in log_ratio])


def _upper_verdict(
    class_name: ClassName,
    axis_kind: Axis,
    axis: np.ndarray,
    scale: np.ndarray,
    log_ratios: np.ndarray,
    settings: ToolkitSettings,
    extra: Optional[Dict[str, float]] = None,
    rel_errors: Sequence[float] = (),
) -> ClassMembershipReport:
    """Plateau / growth rule used by the upper-doubling tests."""
    mask = _last_decade(scale)
    tail = log_ratios[mask]
    slope = _slope_per_decade(scale[mask], tail)
    growth = float(tail[-1] - tail[0])
    monotone = bool(np.all(np.diff(tail) > 0.0))
    if slope < settings.plateau_slope:
        verdict = Verdict.likely_member
    elif monotone and growth >= math.log(settings.divergence_growth):
        verdict = Verdict.likely_nonmember
    else:
        verdict = Verdict.inconclusive
    constants = {"C": float(np.exp(np.max(log_ratios))), "last_decade_slope": slope}
    constants.update(extra or {})
    logger.info(f"{class_name.value}: {verdict.value} (slope {slope:.4g} per decade)")
    return ClassMembershipReport(
        class_name,
        verdict,
        constants,
        axis_kind,
        axis,
        log_ratios,
        rel_errors=rel_errors,
    )


def dhat_profile(
    w: RadialWeight,
    radii: Optional[Sequence[float]] = None,
    settings: Optional[ToolkitSettings] = None,
) -> ClassMembershipReport:
    """Upper doubling test on ω̂(r) / ω̂((1+r)/2)."""
    settings = settings or Settings.get()
    radii = _check_radii(default_radii(w, settings) if radii is None else radii)
    if radii[-1] < MIN_OUTER_RADIUS - 1e-9:
        raise PreconditionError(
            f"the D̂ test needs radii up to {MIN_OUTER_RADIUS}, got {radii[-1]:.6g}"
        )
    outer, outer_errors = _log_tails(w, radii, settings)
    inner, inner_errors = _log_tails(w, (1.0 + radii) / 2.0, settings)
    return _upper_verdict(
        ClassName.Dhat,
        Axis.radius,
        radii,
        1.0 / (1.0 - radii),
        outer - inner,
        settings,
        rel_errors=outer_errors + inner_errors,
    )


def _ladder(K: float, settings: ToolkitSettings) -> List[float]:
    if not K > 1:
        raise DomainError(f"K must be > 1, got {K}")
    ladder = [float(K)]
    ladder.extend(k for k in settings.k_ladder if not math.isclose(k, K))
    return ladder


def _lower_verdict(
    class_name: ClassName,
    axis_kind: Axis,
    axis: np.ndarray,
    scale: np.ndarray,
    ladder: List[float],
    ratios_for: Callable[[float], Tuple[np.ndarray, np.ndarray]],
    power_name: str,
    settings: ToolkitSettings,
) -> ClassMembershipReport:
    """Rule shared by Ď and M: a ratio bounded away from 1 that is not sinking to 1.

    Each K of the ladder is tried in turn and the first one that passes is
    reported. Failing every K is a non-member verdict only when every ratio
    is drifting down to 1.
    """
    mask = _last_decade(scale)
    threshold = math.log1p(settings.doubling_delta)
    notes: List[str] = []
    tried: Dict[float, Tuple[np.ndarray, float, np.ndarray]] = {}
    chosen: Optional[float] = None
    for K in ladder:
        log_ratios, rel_errors = ratios_for(K)
        tail = log_ratios[mask]
        gap_slope = _slope_per_decade(scale[mask], _log_gap(tail))
        tried[K] = (log_ratios, gap_slope, rel_errors)
        if tail.min() >= threshold and gap_slope >= -settings.plateau_slope:
            chosen = K
            break
        inf_ratio = math.exp(tail.min())
        notes.append(f"K={K:g}: inf ratio {inf_ratio:.6g}, gap slope {gap_slope:.4g}")

    if chosen is not None:
        verdict = Verdict.likely_member
    elif all(slope < -settings.plateau_slope for _, slope, _ in tried.values()):
        verdict = Verdict.likely_nonmember
    else:
        verdict = Verdict.inconclusive
    K = chosen if chosen is not None else ladder[-1]
    log_ratios, gap_slope, rel_errors = tried[K]
    constants = {
        "K": K,
        "C": float(np.exp(np.min(log_ratios[mask]))),
        power_name: float(np.min(log_ratios) / math.log(K)),
        "gap_slope": gap_slope,
    }
    logger.info(f"{class_name.value}: {verdict.value} (K={K:g})")
    return ClassMembershipReport(
        class_name,
        verdict,
        constants,
        axis_kind,
        axis,
        log_ratios,
        notes=notes,
        rel_errors=rel_errors,
    )


def dcheck_profile(
    w: RadialWeight,
    K: float = 2.0,
    radii: Optional[Sequence[float]] = None,
    settings: Optional[ToolkitSettings] = None,
) -> ClassMembershipReport:
    """Lower doubling test on ω̂(r) / ω̂(1 - (1-r)/K), searching the K ladder.

    The reported ``tail_power`` is inf ln(ratio) / ln K, an estimate of the
    exponent in ω̂(r) ≥ C((1-r)/(1-t))^a ω̂(t).
    """
    settings = settings or Settings.get()
    radii = _check_radii(default_radii(w, settings) if radii is None else radii)
    log_tails, tail_errors = _log_tails(w, radii, settings)

    def ratios_for(k: float) -> Tuple[np.ndarray, np.ndarray]:
        inner, inner_errors = _log_tails(w, 1.0 - (1.0 - radii) / k, settings)
        return log_tails - inner, tail_errors + inner_errors

    return _lower_verdict(
        ClassName.Dcheck,
        Axis.radius,
        radii,
        1.0 / (1.0 - radii),
        _ladder(K, settings),
        ratios_for,
        "tail_power",
        settings,
    )


def m_profile(
    w: RadialWeight,
    K: float = 2.0,
    exponents: Optional[Sequence[float]] = None,
    settings: Optional[ToolkitSettings] = None,
    table: Optional[MomentTable] = None,
) -> ClassMembershipReport:
    """Moment decay test on ω_x / ω_{Kx}, searching the K ladder.

    The reported ``eta`` is inf ln(ratio) / ln K, an estimate of the exponent
    in ω_x ≥ C (y/x)^η ω_y.
    """
    settings = settings or Settings.get()
    xs = _check_exponents(default_exponents(settings) if exponents is None else exponents)
    table = table or MomentTable(w, settings)
    base, base_errors = _log_moments(table, xs)

    def ratios_for(k: float) -> Tuple[np.ndarray, np.ndarray]:
        shifted, shifted_errors = _log_moments(table, k * xs)
        return base - shifted, base_errors + shifted_errors

    return _lower_verdict(
        ClassName.Mclass,
        Axis.exponent,
        xs,
        xs,
        _ladder(K, settings),
        ratios_for,
        "eta",
        settings,
    )


def moment_doubling_profile(
    w: RadialWeight,
    q: float = 2.0,
    exponents: Optional[Sequence[float]] = None,
    settings: Optional[ToolkitSettings] = None,
    tail_report: Optional[ClassMembershipReport] = None,
    table: Optional[MomentTable] = None,
) -> ClassMembershipReport:
    """Upper doubling test through moments, ω_x / ω_{qx}.

    When `tail_report` (a `dhat_profile` result) is given the report records
    whether both D̂ tests agree.
    """
    if not q > 1:
        raise DomainError(f"q must be > 1, got {q}")
    settings = settings or Settings.get()
    xs = _check_exponents(default_exponents(settings) if exponents is None else exponents)
    table = table or MomentTable(w, settings)
    base, base_errors = _log_moments(table, xs)
    shifted, shifted_errors = _log_moments(table, q * xs)
    report = _upper_verdict(
        ClassName.Dhat,
        Axis.exponent,
        xs,
        xs,
        base - shifted,
        settings,
        {"q": float(q)},
        rel_errors=base_errors + shifted_errors,
    )
    if tail_report is not None:
        agrees = tail_report.verdict is report.verdict
        report = attr.evolve(
            report,
            components=(tail_report,),
            notes=(f"agrees with tail test: {agrees}",),
        )
    return report


def agrees_with_tail_test(report: ClassMembershipReport) -> Optional[bool]:
    """Agreement flag of a `moment_doubling_profile` report, if it was cross-checked."""
    if not report.components:
        return None
    return report.components[0].verdict is report.verdict


def d_profile(
    w: RadialWeight,
    K: float = 2.0,
    radii: Optional[Sequence[float]] = None,
    settings: Optional[ToolkitSettings] = None,
) -> ClassMembershipReport:
    """D = D̂ ∩ Ď: the conjunction of both doubling tests."""
    upper = dhat_profile(w, radii, settings)
    lower = dcheck_profile(w, K, radii, settings)
    verdicts = {upper.verdict, lower.verdict}
    if verdicts == {Verdict.likely_member}:
        verdict = Verdict.likely_member
    elif Verdict.likely_nonmember in verdicts:
        verdict = Verdict.likely_nonmember
    else:
        verdict = Verdict.inconclusive
    constants = {
        "C_upper": upper.estimated_constants["C"],
        "C_lower": lower.estimated_constants["C"],
        "K": lower.estimated_constants["K"],
    }
    return ClassMembershipReport(
        ClassName.D,
        verdict,
        constants,
        Axis.radius,
        upper.axis,
        (),
        components=(upper, lower),
    )


def classify_weight(
    w: RadialWeight,
    classes: Iterable[ClassName] = tuple(ClassName),
    K: float = 2.0,
    settings: Optional[ToolkitSettings] = None,
) -> Dict[ClassName, ClassMembershipReport]:
    """Run the requested class tests, sharing work between them."""
    settings = settings or Settings.get()
    classes = list(classes)
    reports: Dict[ClassName, ClassMembershipReport] = {}
    if ClassName.D in classes:
        reports[ClassName.D] = d_profile(w, K, settings=settings)
        upper, lower = reports[ClassName.D].components
        reports.setdefault(ClassName.Dhat, upper)
        reports.setdefault(ClassName.Dcheck, lower)
    if ClassName.Dhat in classes and ClassName.Dhat not in reports:
        reports[ClassName.Dhat] = dhat_profile(w, settings=settings)
    if ClassName.Dcheck in classes and ClassName.Dcheck not in reports:
        reports[ClassName.Dcheck] = dcheck_profile(w, K, settings=settings)
    if ClassName.Mclass in classes:
        reports[ClassName.Mclass] = m_profile(w, K, settings=settings)
    return {c: reports[c] for c in ClassName if c in reports and c in classes}


__all__ = [
    "Axis",
    "ClassMembershipReport",
    "ClassName",
    "Verdict",
    "agrees_with_tail_test",
    "classify_weight",
    "d_profile",
    "dcheck_profile",
    "default_exponents",
    "default_radii",
    "dhat_profile",
    "m_profile",
    "moment_doubling_profile",
]
