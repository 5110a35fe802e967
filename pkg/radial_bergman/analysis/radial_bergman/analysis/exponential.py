"""Boundedness of P_ω on L^p_ν for pairs of exponential weights.

ν(r) = exp(-α/(1-r^l)^β) and ω(r) = exp(-α̃/(1-r^l̃)^β̃). The projection is
bounded exactly when β = β̃ and α̃ = (2α/p)(l̃/l)^β. Every other pair fails
for one of the reasons in `Branch`, each a statement about the growth of the
D_p quotient, which `corroborate` checks against the computed profile.
"""

import logging
import math
from enum import Enum
from typing import Dict, Optional, Tuple

import attr

from radial_bergman.analysis.conditions import (
    SIGMA_NOT_A_WEIGHT,
    Trend,
    dp_sequence,
)
from radial_bergman.types.config import Settings, ToolkitSettings
from radial_bergman.types.errors import BergmanError, DomainError, PreconditionError
from radial_bergman.types.weights import ExponentialWeight

logger = logging.getLogger(__name__)

MIN_CORROBORATION_N = 100


def _positive(instance, attribute, value):
    if not value > 0.0:
        raise DomainError(f"{attribute.name} must be > 0, got {value}")


def _beta_range(instance, attribute, value):
    if not 0.0 < value <= 1.0:
        raise DomainError(f"{attribute.name} must lie in (0, 1], got {value}")


def _exponent_range(instance, attribute, value):
    if not 1.0 < value < math.inf:
        raise DomainError(f"p must lie in (1, inf), got {value}")


@attr.s(frozen=True)
class ExpWeightParams:
    """p with the parameters of ν (alpha, beta, l) and ω (alpha_t, beta_t, l_t)."""

    p: float = attr.ib(converter=float, validator=_exponent_range)
    alpha: float = attr.ib(converter=float, validator=_positive)
    beta: float = attr.ib(converter=float, validator=_beta_range)
    l: float = attr.ib(converter=float, validator=_positive)  # noqa: E741
    alpha_t: float = attr.ib(converter=float, validator=_positive)
    beta_t: float = attr.ib(converter=float, validator=_beta_range)
    l_t: float = attr.ib(converter=float, validator=_positive)

    @property
    def q(self) -> float:
        """Conjugate exponent."""
        return self.p / (self.p - 1.0)

    def nu(self) -> ExponentialWeight:
        """The weight ν."""
        return ExponentialWeight(self.alpha, self.beta, self.l)

    def omega(self) -> ExponentialWeight:
        """The weight ω."""
        return ExponentialWeight(self.alpha_t, self.beta_t, self.l_t)

    def manifold_alpha(self) -> float:
        """(2α/p)(l̃/l)^β, the only α̃ giving a bounded projection."""
        return 2.0 * self.alpha / self.p * (self.l_t / self.l) ** self.beta


class BoundednessVerdict(str, Enum):
    """Whether P_ω is bounded on L^p_ν."""

    bounded = "bounded"
    unbounded = "unbounded"


class Branch(str, Enum):
    """The argument that decides a pair."""

    beta_mismatch_sigma_not_weight = "beta_mismatch_sigma_not_weight"
    beta_mismatch_exponent_race = "beta_mismatch_exponent_race"
    alpha_below_ap = "alpha_below_ap"
    alpha_equal_ap = "alpha_equal_ap"
    alpha_f_negative = "alpha_f_negative"
    bounded_case = "bounded_case"

    @property
    def verdict(self) -> BoundednessVerdict:
        """Verdict implied by the branch."""
        if self is Branch.bounded_case:
            return BoundednessVerdict.bounded
        return BoundednessVerdict.unbounded


@attr.s(frozen=True)
class CorroborationRecord:
    """Outcome of comparing a verdict with the computed D_p profile.

    `consistent` is None when the profile could not be computed.
    """

    n_max: int = attr.ib()
    trend: Optional[Trend] = attr.ib()
    reason: str = attr.ib()
    sup_estimate: float = attr.ib(default=math.nan)
    consistent: Optional[bool] = attr.ib(default=None)

    @property
    def available(self) -> bool:
        """Whether the numerical corroboration ran."""
        return self.consistent is not None


@attr.s(frozen=True)
class ClassificationReport:
    """Verdict for one parameter tuple with the numbers behind it."""

    params: ExpWeightParams = attr.ib()
    branch: Branch = attr.ib()
    numbers: Dict[str, float] = attr.ib(factory=dict)
    notes: Tuple[str, ...] = attr.ib(default=(), converter=tuple)
    corroboration: Optional[CorroborationRecord] = attr.ib(default=None)

    @property
    def verdict(self) -> BoundednessVerdict:
        """Verdict of the decision branch."""
        return self.branch.verdict

    @property
    def bounded(self) -> bool:
        """Whether the branch says bounded."""
        return self.verdict is BoundednessVerdict.bounded


def bconst(alpha: float, beta: float, l: float) -> float:  # noqa: E741
    """B(α, β, l) = l^{-β/(β+1)} α^{1/(β+1)} (β^{1/(β+1)} + β^{-1/(β+1)}).

    The moments of exp(-α/(1-r^l)^β) decay like exp(-B(α, β, l) x^{β/(β+1)}).
    """
    if not alpha > 0.0 or not l > 0.0:
        raise DomainError(f"alpha and l must be > 0, got alpha={alpha}, l={l}")
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"beta must lie in (0, 1], got {beta}")
    t = 1.0 / (beta + 1.0)
    return l ** (-beta * t) * alpha**t * (beta**t + beta ** (-t))


def rescale_l(params: ExpWeightParams) -> ExpWeightParams:
    """Replace ν by the comparable weight with l = l̃, α scaled by (l̃/l)^β.

    Raises:
        PreconditionError: β ≠ β̃.
    """
    if params.beta != params.beta_t:
        raise PreconditionError(
            f"rescaling needs beta = beta_t, got {params.beta} and {params.beta_t}"
        )
    if params.l == params.l_t:
        return params
    alpha = (params.l_t / params.l) ** params.beta * params.alpha
    return attr.evolve(params, alpha=alpha, l=params.l_t)


def step3_f(alpha_t: float, alpha: float, p: float, beta: float) -> float:
    """f(α̃) = p^{-t}α^t + (α̃ - α/p)^t - 2^{1-t}α̃^t with t = 1/(β+1).

    f vanishes at α̃ = 2α/p and is negative elsewhere on (α/p, ∞).

    Raises:
        DomainError: α̃ ≤ α/p.
    """
    if not alpha_t > alpha / p:
        raise DomainError(
            f"f is defined for alpha_t > alpha/p = {alpha / p}, got {alpha_t}"
        )
    t = 1.0 / (beta + 1.0)
    head = p ** (-t) * alpha**t + (alpha_t - alpha / p) ** t
    return head - 2.0 ** (1.0 - t) * alpha_t**t


def positivity_combination(
    alpha: float, beta: float, l: float, p: float  # noqa: E741
) -> float:
    """B(α,β,l) 2^{β/(β+1)} - B(p'α,β,l) (p')^{-1/(β+1)}, always positive.

    The D_p quotient of a pair with β̃ > β grows like the exponential of this
    number (taken at ω's parameters) times n^{β̃/(β̃+1)}.
    """
    q = p / (p - 1.0)
    t = 1.0 / (beta + 1.0)
    doubled = bconst(alpha, beta, l) * 2.0 ** (beta * t)
    return doubled - bconst(q * alpha, beta, l) * q ** (-t)


def _relative_gap(value: float, target: float) -> float:
    return abs(value - target) / abs(target)


def classify(
    params: ExpWeightParams, settings: Optional[ToolkitSettings] = None
) -> ClassificationReport:
    """Decide boundedness of P_ω on L^p_ν.

    `numbers` records the leading exponents β/(β+1) and β̃/(β̃+1), the B
    constants of both weights and, where defined, f(α̃) and the growth rate
    of ln D_p against n^{β/(β+1)}. Equalities are tested with relative
    tolerance ``classify_rel_tol``; an unbounded verdict within
    ``proximity_band`` of the bounded manifold is logged as a warning.
    """
    settings = settings or Settings.get()
    tol = settings.classify_rel_tol
    p, beta, beta_t = params.p, params.beta, params.beta_t
    numbers: Dict[str, float] = {
        "lead_exponent_nu": beta / (beta + 1.0),
        "lead_exponent_omega": beta_t / (beta_t + 1.0),
        "b_nu": bconst(params.alpha, beta, params.l),
        "b_omega": bconst(params.alpha_t, beta_t, params.l_t),
    }
    notes = []

    if _relative_gap(beta_t, beta) > tol:
        if beta > beta_t:
            branch = Branch.beta_mismatch_sigma_not_weight
            numbers["race_rate"] = math.inf
        else:
            branch = Branch.beta_mismatch_exponent_race
            numbers["race_rate"] = positivity_combination(
                params.alpha_t, beta_t, params.l_t, p
            )
        if _relative_gap(beta_t, beta) <= settings.proximity_band:
            band = settings.proximity_band
            notes.append(f"beta and beta_t differ by less than {band:g}")
        return _report(params, branch, numbers, notes)

    reduced = rescale_l(attr.evolve(params, beta_t=beta))
    alpha, alpha_t = reduced.alpha, reduced.alpha_t
    target = 2.0 * alpha / p
    numbers["rescaled_alpha"] = alpha
    numbers["manifold_alpha"] = target
    numbers["manifold_gap"] = _relative_gap(alpha_t, target)
    prefactor = bconst(1.0, beta, reduced.l)

    if numbers["manifold_gap"] <= tol:
        branch = Branch.bounded_case
        numbers["race_rate"] = 0.0
    elif _relative_gap(alpha_t, alpha / p) <= tol:
        branch = Branch.alpha_equal_ap
        numbers["race_rate"] = prefactor * (alpha / p) ** (1.0 / (beta + 1.0)) * (
            2.0 ** (beta / (beta + 1.0)) - 1.0
        )
    elif alpha_t < alpha / p:
        branch = Branch.alpha_below_ap
        numbers["race_rate"] = math.inf
    else:
        branch = Branch.alpha_f_negative
        f = step3_f(alpha_t, alpha, p, beta)
        numbers["f_value"] = f
        numbers["race_rate"] = -prefactor * f

    near = numbers["manifold_gap"] <= settings.proximity_band
    if branch is not Branch.bounded_case and near:
        notes.append(
            f"alpha_t is within {settings.proximity_band:g} of the bounded manifold;"
            " the verdict is sensitive to rounding"
        )
    return _report(params, branch, numbers, notes)


def _report(
    params: ExpWeightParams, branch: Branch, numbers: Dict[str, float], notes
) -> ClassificationReport:
    for note in notes:
        logger.warning(f"{params}: {note}")
    logger.info(f"{params}: {branch.verdict.value} ({branch.value})")
    return ClassificationReport(params, branch, numbers, notes)


def corroborate(
    params: ExpWeightParams,
    N: int = 200,
    settings: Optional[ToolkitSettings] = None,
) -> ClassificationReport:
    """Classify and compare the verdict with the trend of the D_p profile.

    A bounded verdict is consistent with a bounded or inconclusive trend,
    since the bounded case may converge slowly; an unbounded verdict needs a
    diverging trend. A failed profile leaves the record unavailable and the
    classification in place.

    Raises:
        PreconditionError: N < 100.
    """
    settings = settings or Settings.get()
    if N < MIN_CORROBORATION_N:
        raise PreconditionError(
            f"corroboration needs N >= {MIN_CORROBORATION_N}, got {N}"
        )
    report = classify(params, settings)
    try:
        profile = dp_sequence(params.omega(), params.nu(), params.p, N, settings)
    except BergmanError as e:
        logger.warning(f"{params}: D_p profile unavailable: {e}")
        record = CorroborationRecord(N, None, f"profile unavailable: {e}")
        return attr.evolve(report, corroboration=record)

    trend = profile.trend.trend
    complete = len(profile.axis) == N + 1 or profile.reason == SIGMA_NOT_A_WEIGHT
    if not complete:
        record = CorroborationRecord(N, trend, profile.reason, profile.sup_estimate)
        logger.warning(f"{params}: D_p profile incomplete: {profile.reason}")
        return attr.evolve(report, corroboration=record)

    if report.bounded:
        consistent = trend in (Trend.bounded, Trend.inconclusive)
    else:
        consistent = trend is Trend.diverging
    record = CorroborationRecord(
        N, trend, profile.reason, profile.sup_estimate, consistent
    )
    if not consistent:
        logger.warning(
            f"{params}: verdict {report.verdict.value} but D_p trend {trend.value}"
        )
    return attr.evolve(report, corroboration=record)


def _grid_entry(p, alpha, beta, l, alpha_t, beta_t, l_t, branch):  # noqa: E741
    return ExpWeightParams(p, alpha, beta, l, alpha_t, beta_t, l_t), branch


EXAMPLE_GRID: Tuple[Tuple[ExpWeightParams, Branch], ...] = (
    _grid_entry(2, 1, 0.5, 1, 1, 0.5, 1, Branch.bounded_case),
    _grid_entry(3, 1.5, 1, 1, 1, 1, 1, Branch.bounded_case),
    _grid_entry(1.5, 0.75, 0.5, 1, 1, 0.5, 1, Branch.bounded_case),
    _grid_entry(4, 2, 0.5, 1, 1, 0.5, 1, Branch.bounded_case),
    _grid_entry(2, 1, 0.5, 4, 0.5, 0.5, 1, Branch.bounded_case),
    _grid_entry(2, 1, 0.5, 1, 2, 0.5, 4, Branch.bounded_case),
    _grid_entry(2, 1, 0.5, 2, 1, 0.5, 2, Branch.bounded_case),
    _grid_entry(2, 1, 0.5, 1, 1, 0.75, 1, Branch.beta_mismatch_exponent_race),
    _grid_entry(2, 1, 0.25, 1, 1, 1, 1, Branch.beta_mismatch_exponent_race),
    _grid_entry(3, 2, 0.5, 2, 1, 1, 1, Branch.beta_mismatch_exponent_race),
    _grid_entry(2, 1, 0.75, 1, 1, 0.5, 1, Branch.beta_mismatch_sigma_not_weight),
    _grid_entry(2, 1, 1, 1, 1, 0.25, 1, Branch.beta_mismatch_sigma_not_weight),
    _grid_entry(2, 1, 1, 1, 0.3, 1, 1, Branch.alpha_below_ap),
    _grid_entry(2, 2, 1, 1, 1, 1, 2, Branch.alpha_below_ap),
    _grid_entry(2, 1, 0.5, 1, 0.4, 0.5, 1, Branch.alpha_below_ap),
    _grid_entry(2, 1, 1, 1, 0.5, 1, 1, Branch.alpha_equal_ap),
    _grid_entry(4, 2, 0.5, 1, 0.5, 0.5, 1, Branch.alpha_equal_ap),
    _grid_entry(1.5, 1.5, 1, 1, 1, 1, 1, Branch.alpha_equal_ap),
    _grid_entry(2, 1, 1, 1, 0.6, 1, 1, Branch.alpha_f_negative),
    _grid_entry(2, 1, 1, 1, 1.5, 1, 1, Branch.alpha_f_negative),
    _grid_entry(3, 3, 1, 1, 3, 1, 1, Branch.alpha_f_negative),
    _grid_entry(2, 1, 0.5, 1, 0.55, 0.5, 1, Branch.alpha_f_negative),
    _grid_entry(3, 1, 0.75, 1, 2, 0.75, 1, Branch.alpha_f_negative),
)


__all__ = [
    "Branch",
    "BoundednessVerdict",
    "ClassificationReport",
    "CorroborationRecord",
    "EXAMPLE_GRID",
    "ExpWeightParams",
    "bconst",
    "classify",
    "corroborate",
    "positivity_combination",
    "rescale_l",
    "step3_f",
]
