"""Built-in weights, pairs and the acceptance battery run by ``radial-bergman suite``."""

import logging
import math
import time
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import attr
import numpy as np

from radial_bergman.analysis.classes import (
    ClassName,
    Verdict,
    agrees_with_tail_test,
    classify_weight,
    moment_doubling_profile,
)
from radial_bergman.analysis.conditions import (
    class_transfer_checks,
    dp_sequence,
    holder_floor_check,
    integration_identity_check,
)
from radial_bergman.analysis.exponential import (
    EXAMPLE_GRID,
    classify,
    corroborate,
    step3_f,
)
from radial_bergman.analysis.kernel import KernelSeries, kernel_eval
from radial_bergman.analysis.projection import (
    AnalyticPolynomial,
    MonomialRadialFunction,
    PolarGridFunction,
    littlewood_paley_check,
    operator_norm_lower_bound,
    project_grid,
    project_monomial_radial,
)
from radial_bergman.types.config import Settings, ToolkitSettings
from radial_bergman.types.errors import BergmanError, NotAWeightError
from radial_bergman.types.moments import MomentTable
from radial_bergman.types.weights import (
    ExponentialWeight,
    RadialWeight,
    RapidlyIncreasingWeight,
    StandardWeight,
    sigma_weight,
)

logger = logging.getLogger(__name__)

MEMBER = Verdict.likely_member
NONMEMBER = Verdict.likely_nonmember


def _expect(
    dhat: Verdict, dcheck: Verdict, m: Verdict, d: Verdict
) -> Dict[ClassName, Verdict]:
    return {
        ClassName.Dhat: dhat,
        ClassName.Dcheck: dcheck,
        ClassName.Mclass: m,
        ClassName.D: d,
    }


@attr.s(frozen=True)
class SuiteWeight:
    """A named weight with its expected class memberships."""

    name: str = attr.ib()
    weight: RadialWeight = attr.ib()
    expected: Dict[ClassName, Verdict] = attr.ib()


@attr.s(frozen=True)
class SuitePair:
    """ω, ν and p of one two-weight problem."""

    name: str = attr.ib()
    omega: RadialWeight = attr.ib()
    nu: RadialWeight = attr.ib()
    p: float = attr.ib()

    @property
    def sigma_is_weight(self) -> bool:
        """Whether σ is integrable for this pair."""
        try:
            sigma_weight(self.omega, self.nu, self.p)
        except NotAWeightError:
            return False
        return True


_STANDARD = _expect(MEMBER, MEMBER, MEMBER, MEMBER)
_EXPONENTIAL = _expect(NONMEMBER, MEMBER, MEMBER, NONMEMBER)
_RAPID = _expect(MEMBER, NONMEMBER, NONMEMBER, NONMEMBER)

SUITE_WEIGHTS: Tuple[SuiteWeight, ...] = (
    SuiteWeight("std0", StandardWeight(0.0), _STANDARD),
    SuiteWeight("std1", StandardWeight(1.0), _STANDARD),
    SuiteWeight("std2.5", StandardWeight(2.5), _STANDARD),
    SuiteWeight("exp(1,1,1)", ExponentialWeight(1.0, 1.0, 1.0), _EXPONENTIAL),
    SuiteWeight("exp(1,0.5,1)", ExponentialWeight(1.0, 0.5, 1.0), _EXPONENTIAL),
    SuiteWeight("ri2", RapidlyIncreasingWeight(2.0), _RAPID),
)

SUITE_PAIRS: Tuple[SuitePair, ...] = (
    SuitePair("std1/std1 p=2", StandardWeight(1.0), StandardWeight(1.0), 2.0),
    SuitePair("std2/std0 p=2", StandardWeight(2.0), StandardWeight(0.0), 2.0),
    SuitePair("std1/std0 p=2", StandardWeight(1.0), StandardWeight(0.0), 2.0),
    SuitePair(
        "exp(1,0.5)/exp(1,0.5) p=2",
        ExponentialWeight(1.0, 0.5, 1.0),
        ExponentialWeight(1.0, 0.5, 1.0),
        2.0,
    ),
    SuitePair("std2/std0 p=3", StandardWeight(2.0), StandardWeight(0.0), 3.0),
    SuitePair(
        "ri2/ri2 p=2", RapidlyIncreasingWeight(2.0), RapidlyIncreasingWeight(2.0), 2.0
    ),
)


def suite_weight(name: str) -> SuiteWeight:
    """Look up a suite weight by name."""
    for entry in SUITE_WEIGHTS:
        if entry.name == name:
            return entry
    raise KeyError(name)


@attr.s(frozen=True)
class CheckResult:
    """One battery check on one subject."""

    criterion: str = attr.ib()
    subject: str = attr.ib()
    passed: bool = attr.ib()
    detail: str = attr.ib(default="")


@attr.s(frozen=True)
class BatteryReport:
    """Every check result of one battery run."""

    results: Tuple[CheckResult, ...] = attr.ib(converter=tuple)
    quick: bool = attr.ib(default=False)
    elapsed: float = attr.ib(default=0.0)

    @property
    def passed(self) -> bool:
        """Whether every check passed."""
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> List[CheckResult]:
        """The failed checks."""
        return [r for r in self.results if not r.passed]

    def by_criterion(self) -> Dict[str, List[CheckResult]]:
        """Results grouped by criterion, in run order."""
        grouped: Dict[str, List[CheckResult]] = {}
        for result in self.results:
            grouped.setdefault(result.criterion, []).append(result)
        return grouped


@attr.s(frozen=True)
class BatteryContext:
    """Settings, mode and random source shared by the checks."""

    settings: ToolkitSettings = attr.ib()
    quick: bool = attr.ib()
    rng: np.random.Generator = attr.ib()

    @property
    def trend_n(self) -> int:
        """Sequence length for trend checks."""
        return 60 if self.quick else 200

    @property
    def identity_n(self) -> int:
        """Sequence length for identity checks."""
        return 10 if self.quick else 50


Check = Callable[[BatteryContext], Iterable[CheckResult]]


def _relative(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def check_kernel_oracle(ctx: BatteryContext) -> Iterable[CheckResult]:
    """Kernel series against the closed standard kernel."""
    count = 10 if ctx.quick else 100
    for alpha in (0.0, 1.0, 2.5):
        w = StandardWeight(alpha)
        series = KernelSeries(w, ctx.settings)
        radius = math.sqrt(0.9)
        z = radius * ctx.rng.random(count) * np.exp(2j * np.pi * ctx.rng.random(count))
        zeta = radius * ctx.rng.random(count) * np.exp(2j * np.pi * ctx.rng.random(count))
        worst = 0.0
        for a, b in zip(z, zeta):
            value = kernel_eval(w, a, b, tol=1e-14, series=series, settings=ctx.settings)
            exact = (1.0 - np.conj(a) * b) ** (-(2.0 + alpha))
            worst = max(worst, abs(value.value - exact))
        yield CheckResult(
            "kernel_oracle", f"std{alpha:g}", worst <= 1e-8, f"max error {worst:.3g}"
        )


def check_reproducing(ctx: BatteryContext) -> Iterable[CheckResult]:
    """Projection reproduces random polynomials."""
    top = 10 if ctx.quick else 50
    for entry in SUITE_WEIGHTS:
        coefficients = [
            project_monomial_radial(
                entry.weight, MonomialRadialFunction.with_constant(n), ctx.settings
            ).coefficients[n]
            for n in range(top + 1)
        ]
        worst = max(abs(c - 1.0) for c in coefficients)
        yield CheckResult(
            "reproducing", entry.name, worst <= 1e-12, f"max |c - 1| {worst:.3g}"
        )

    poly = AnalyticPolynomial([0.2, 0.5, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.3j])
    targets = np.array([0.3, 0.5j, -0.2 + 0.4j])
    grid = PolarGridFunction.from_callable(poly)
    for name, tol in (("std0", 1e-5), ("std1", 1e-5), ("exp(1,0.5,1)", 1e-4)):
        w = suite_weight(name).weight
        result = project_grid(w, grid, targets, settings=ctx.settings)
        worst = float(np.max(np.abs(result.values - poly(targets))))
        yield CheckResult(
            "reproducing_grid", name, worst <= tol, f"max error {worst:.3g}"
        )


def check_extremal_identity(ctx: BatteryContext) -> Iterable[CheckResult]:
    """Monomial lower bounds agree with D_p."""
    N = ctx.identity_n
    for pair in SUITE_PAIRS:
        if not pair.sigma_is_weight:
            yield CheckResult("extremal_identity", pair.name, True, "σ not a weight")
            continue
        bounds = operator_norm_lower_bound(pair.omega, pair.nu, pair.p, N, ctx.settings)
        profile = dp_sequence(pair.omega, pair.nu, pair.p, N, ctx.settings)
        worst = max(_relative(a, b) for a, b in zip(bounds, profile.values))
        yield CheckResult(
            "extremal_identity",
            pair.name,
            worst <= 1e-10,
            f"max relative gap {worst:.3g}",
        )


def check_holder_floor(ctx: BatteryContext) -> Iterable[CheckResult]:
    """A_p and D_p never fall below one."""
    for pair in SUITE_PAIRS:
        if not pair.sigma_is_weight:
            continue
        report = holder_floor_check(
            pair.omega, pair.nu, pair.p, N=ctx.identity_n, settings=ctx.settings
        )
        yield CheckResult(
            "holder_floor",
            pair.name,
            report.holds(1e-9),
            f"worst slack {report.worst:.3g}",
        )


def check_trend_agreement(ctx: BatteryContext) -> Iterable[CheckResult]:
    """Class transfer checks on every suite pair."""
    for pair in SUITE_PAIRS:
        report = class_transfer_checks(
            pair.omega, pair.nu, pair.p, N=ctx.trend_n, settings=ctx.settings
        )
        for check in report.checks:
            detail = check.detail
            if not check.applicable:
                detail = f"not applicable: {detail}"
            yield CheckResult(f"transfer_{check.name}", pair.name, check.passed, detail)


def check_exp_grid(ctx: BatteryContext) -> Iterable[CheckResult]:
    """Exponential example grid lands in the expected branches."""
    for params, branch in EXAMPLE_GRID:
        subject = (
            f"p={params.p:g} nu=({params.alpha:g},{params.beta:g},{params.l:g})"
            f" omega=({params.alpha_t:g},{params.beta_t:g},{params.l_t:g})"
        )
        if ctx.quick:
            report = classify(params, ctx.settings)
        else:
            report = corroborate(params, 200, ctx.settings)
        passed = report.branch is branch
        detail = f"{report.branch.value}, expected {branch.value}"
        record = report.corroboration
        if record is not None:
            passed = passed and bool(record.consistent)
            trend = record.trend.value if record.trend else "none"
            detail += f"; D_p trend {trend}"
        yield CheckResult("exp_classification", subject, passed, detail)


def check_step3_root(ctx: BatteryContext) -> Iterable[CheckResult]:
    """The auxiliary function vanishes at 2α/p and is negative elsewhere."""
    count = 20 if ctx.quick else 100
    worst_root, worst_sign = 0.0, -math.inf
    for _ in range(count):
        alpha = ctx.rng.uniform(0.1, 5.0)
        p = ctx.rng.uniform(1.1, 5.0)
        beta = ctx.rng.uniform(0.05, 1.0)
        root = 2.0 * alpha / p
        worst_root = max(worst_root, abs(step3_f(root, alpha, p, beta)))
        scan = np.linspace(alpha / p, 10.0 * alpha / p, 1001)[1:]
        scan = scan[np.abs(scan - root) > 1e-6 * root]
        worst_sign = max(worst_sign, max(step3_f(a, alpha, p, beta) for a in scan))
    yield CheckResult(
        "step3_root", "f(2α/p)", worst_root <= 1e-12, f"max |f| {worst_root:.3g}"
    )
    yield CheckResult(
        "step3_sign", "f off the root", worst_sign < 0.0, f"max f {worst_sign:.3g}"
    )


def check_integration_identity(ctx: BatteryContext) -> Iterable[CheckResult]:
    """Quadrature matches the tail integration identity."""
    for pair in SUITE_PAIRS:
        if not pair.sigma_is_weight:
            continue
        report = integration_identity_check(
            pair.omega, pair.nu, pair.p, settings=ctx.settings
        )
        worst = report.max_rel_error
        yield CheckResult(
            "integration_identity",
            pair.name,
            worst <= 1e-6,
            f"max relative error {worst:.3g}",
        )


def check_weight_classes(ctx: BatteryContext) -> Iterable[CheckResult]:
    """Suite weights land in their expected classes."""
    for entry in SUITE_WEIGHTS:
        reports = classify_weight(entry.weight, settings=ctx.settings)
        for class_name, expected in entry.expected.items():
            got = reports[class_name].verdict
            yield CheckResult(
                f"class_{class_name.value}",
                entry.name,
                got is expected,
                f"{got.value}, expected {expected.value}",
            )
        moments = moment_doubling_profile(
            entry.weight, settings=ctx.settings, tail_report=reports[ClassName.Dhat]
        )
        yield CheckResult(
            "dhat_tests_agree",
            entry.name,
            bool(agrees_with_tail_test(moments)),
            f"moment test {moments.verdict.value}",
        )


def check_moment_invariants(ctx: BatteryContext) -> Iterable[CheckResult]:
    """Moments decrease and are log-convex in x."""
    xs = np.arange(0.0, 101.0)
    for entry in SUITE_WEIGHTS:
        log_values = MomentTable(entry.weight, ctx.settings).log_values(xs)
        steps = np.diff(log_values)
        monotone = bool(np.all(steps <= 1e-9))
        convex = bool(np.all(np.diff(steps) >= -1e-9))
        yield CheckResult(
            "moment_invariants",
            entry.name,
            monotone and convex,
            f"non-increasing {monotone}, log-convex {convex}",
        )


def check_littlewood_paley(ctx: BatteryContext) -> Iterable[CheckResult]:
    """Littlewood-Paley ratios stay bounded without drift."""
    for alpha in (0.0, 1.0, 2.0):
        report = littlewood_paley_check(StandardWeight(alpha), 2.0, settings=ctx.settings)
        passed = math.isfinite(report.high) and not report.drifts
        yield CheckResult(
            "littlewood_paley",
            f"std{alpha:g}",
            passed,
            f"bracket [{report.low:.4g}, {report.high:.4g}]",
        )
    exp_weight = suite_weight("exp(1,1,1)").weight
    report = littlewood_paley_check(exp_weight, 2.0, settings=ctx.settings)
    yield CheckResult(
        "littlewood_paley",
        "exp(1,1,1)",
        report.drifts,
        f"expected drift, slope {report.drift_slope:.3g}",
    )


CHECKS: Dict[str, Check] = {
    "kernel_oracle": check_kernel_oracle,
    "reproducing": check_reproducing,
    "extremal_identity": check_extremal_identity,
    "holder_floor": check_holder_floor,
    "trend_agreement": check_trend_agreement,
    "exp_classification": check_exp_grid,
    "step3_root": check_step3_root,
    "integration_identity": check_integration_identity,
    "weight_classes": check_weight_classes,
    "moment_invariants": check_moment_invariants,
    "littlewood_paley": check_littlewood_paley,
}


def run_battery(
    settings: Optional[ToolkitSettings] = None,
    quick: bool = False,
    seed: int = 0,
    checks: Optional[Iterable[str]] = None,
) -> BatteryReport:
    """Run the named checks (all by default) and collect their results.

    A check that raises is recorded as one failed result carrying the error.
    """
    settings = settings or Settings.get()
    names = list(CHECKS) if checks is None else list(checks)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise KeyError(f"unknown checks: {', '.join(unknown)}")
    ctx = BatteryContext(settings, quick, np.random.default_rng(seed))
    started = time.perf_counter()
    results: List[CheckResult] = []
    for name in names:
        logger.info(f"battery: running {name}")
        try:
            results.extend(CHECKS[name](ctx))
        except BergmanError as e:
            logger.warning(f"battery check {name} raised", exc_info=True)
            results.append(CheckResult(name, "-", False, f"{type(e).__name__}: {e}"))
    report = BatteryReport(results, quick, time.perf_counter() - started)
    logger.info(
        f"battery: {len(results) - len(report.failures)}/{len(results)} passed"
        f" in {report.elapsed:.1f}s"
    )
    return report


__all__ = [
    "BatteryReport",
    "CHECKS",
    "CheckResult",
    "SUITE_PAIRS",
    "SUITE_WEIGHTS",
    "SuitePair",
    "SuiteWeight",
    "run_battery",
    "suite_weight",
]
