"""Argument parsing and dispatch for the ``radial-bergman`` command."""

import argparse
import logging
import math
import sys
import time
from typing import Dict, List, Optional, Sequence, TextIO

import numpy as np

from radial_bergman.analysis.classes import (
    ClassMembershipReport,
    ClassName,
    classify_weight,
)
from radial_bergman.analysis.conditions import (
    ConditionProfile,
    Criterion,
    ap_profile,
    dp_sequence,
    mp_profile,
)
from radial_bergman.analysis.exponential import ExpWeightParams, classify, corroborate
from radial_bergman.analysis.kernel import kernel_derivative_eval
from radial_bergman.analysis.projection import (
    PolarGridFunction,
    maximal_project_grid,
    operator_norm_lower_bound,
    project_grid,
    t_plus_k,
)
from radial_bergman.analysis.suite import CHECKS, run_battery
from radial_bergman.cli.errors import EXIT_FAILURE, EXIT_OK, UsageError, handle_exception
from radial_bergman.cli.models import ReportDocument, ResultBlock
from radial_bergman.cli.output import OutputFormat, emit
from radial_bergman.cli.version import __version__
from radial_bergman.types.config import Settings, ToolkitSettings
from radial_bergman.types.errors import WeightSpecError
from radial_bergman.types.moments import MomentTable, tail_integral_result
from radial_bergman.types.notation import format_weight, parse_params, parse_weight
from radial_bergman.types.rfc3339 import now_to_rfc3339_str
from radial_bergman.types.weights import RadialWeight

logger = logging.getLogger(__name__)


def _weight(text: str) -> RadialWeight:
    try:
        return parse_weight(text)
    except WeightSpecError as e:
        raise argparse.ArgumentTypeError(str(e))


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a complex number")


def _shield_negative(token: str) -> str:
    """Keep argparse from reading a value such as -0.2+0.4j as an option."""
    if token.startswith("-") and not token.startswith("--"):
        try:
            complex(token)
        except ValueError:
            return token
        return " " + token
    return token


def _exp_params(text: str) -> Dict[str, float]:
    try:
        params = parse_params(text, ("alpha", "beta"), ("l",))
    except WeightSpecError as e:
        raise argparse.ArgumentTypeError(str(e))
    params.setdefault("l", 1.0)
    return params


def _moments(ns: argparse.Namespace, settings: ToolkitSettings) -> List[ResultBlock]:
    table = MomentTable(ns.weight, settings)
    rows = []
    for x in ns.x:
        entry = table.entry(x)
        rows.append([x, entry.value, entry.log_value, entry.rel_error, entry.backend])
    blocks = [
        ResultBlock(
            kind="moments",
            title=f"moments of {format_weight(ns.weight)}",
            values={"weight": format_weight(ns.weight)},
            columns=["x", "value", "log_value", "rel_error", "backend"],
            rows=rows,
            notes=[f"{kind} violated at x={x:g}" for kind, x in table.check_invariants()],
        )
    ]
    if ns.tail:
        rows = []
        for r in ns.tail:
            result = tail_integral_result(ns.weight, r, settings)
            rows.append(
                [r, result.value, result.log_value, result.rel_error, result.backend]
            )
        blocks.append(
            ResultBlock(
                kind="tail",
                title=f"tail integrals of {format_weight(ns.weight)}",
                columns=["r", "value", "log_value", "rel_error", "backend"],
                rows=rows,
            )
        )
    return blocks


def _class_block(w: RadialWeight, report: ClassMembershipReport) -> ResultBlock:
    values = {
        "class": report.class_name,
        "verdict": report.verdict,
        "axis": report.axis_kind,
        **{f"constant_{k}": v for k, v in report.estimated_constants.items()},
    }
    for component in report.components:
        values[f"component_{component.class_name.value}"] = component.verdict
    errors = report.rel_errors or [math.nan] * len(report.log_ratios)
    rows = [
        [a, float(np.exp(lr)), lr, err]
        for a, lr, err in zip(report.axis, report.log_ratios, errors)
    ]
    return ResultBlock(
        kind="class",
        title=f"{report.class_name.value} test of {format_weight(w)}",
        values=values,
        columns=["axis", "ratio", "log_ratio", "rel_error"] if rows else [],
        rows=rows,
        notes=list(report.notes),
    )


def _classify_weight(
    ns: argparse.Namespace, settings: ToolkitSettings
) -> List[ResultBlock]:
    classes = [ClassName(c) for c in ns.classes]
    reports = classify_weight(ns.weight, classes, ns.K, settings)
    return [_class_block(ns.weight, report) for report in reports.values()]


def _profile_block(
    profile: ConditionProfile, omega: RadialWeight, nu: RadialWeight
) -> ResultBlock:
    axis_name = "index" if profile.criterion is Criterion.Dp else "radius"
    trend = profile.trend
    rows = [
        [a, float(np.exp(lv)), lv, err]
        for a, lv, err in zip(profile.axis, profile.log_values, profile.rel_errors)
    ]
    return ResultBlock(
        kind="condition",
        title=(
            f"{profile.criterion.value} of omega={format_weight(omega)},"
            f" nu={format_weight(nu)}, p={profile.p:g}"
        ),
        values={
            "criterion": profile.criterion,
            "p": profile.p,
            "trend": trend.trend,
            "reason": trend.reason,
            "sup_estimate": profile.sup_estimate,
            "max_rel_error": max(profile.rel_errors, default=math.nan),
            "late_rate": trend.late_rate,
            "early_rate": trend.early_rate,
        },
        columns=[axis_name, "value", "log_value", "rel_error"],
        rows=rows,
    )


def _condition(ns: argparse.Namespace, settings: ToolkitSettings) -> List[ResultBlock]:
    if ns.criterion == "dp":
        if ns.radii:
            raise UsageError("--radii applies to ap and mp only")
        profile = dp_sequence(ns.omega, ns.nu, ns.p, ns.n, settings, dense=ns.dense)
    else:
        if ns.dense:
            raise UsageError("--dense applies to dp only")
        compute = ap_profile if ns.criterion == "ap" else mp_profile
        profile = compute(ns.omega, ns.nu, ns.p, ns.radii, settings)
    return [_profile_block(profile, ns.omega, ns.nu)]


def _kernel(ns: argparse.Namespace, settings: ToolkitSettings) -> List[ResultBlock]:
    rows = []
    for k in ns.k:
        # (B_zeta)^(k)(z), derivatives taken in z
        value = kernel_derivative_eval(
            ns.weight, ns.zeta, ns.z, k, ns.tol, settings=settings
        )
        v = value.value
        rows.append([k, v.real, v.imag, abs(v), value.error_bound, value.terms])
    return [
        ResultBlock(
            kind="kernel",
            title=f"kernel of {format_weight(ns.weight)}",
            values={
                "weight": format_weight(ns.weight),
                "z": [ns.z.real, ns.z.imag],
                "zeta": [ns.zeta.real, ns.zeta.imag],
            },
            columns=["k", "re", "im", "abs", "error_bound", "terms"],
            rows=rows,
        )
    ]


PROJECTIONS = {
    "P": lambda ns, f, s: project_grid(ns.omega, f, ns.z, ns.tol, settings=s),
    "P+": lambda ns, f, s: maximal_project_grid(ns.omega, f, ns.z, ns.tol, settings=s),
    "T+": lambda ns, f, s: t_plus_k(ns.omega, ns.k, f, ns.z, ns.tol, settings=s),
}


def _project(ns: argparse.Namespace, settings: ToolkitSettings) -> List[ResultBlock]:
    if ns.mode == "extremal":
        ratios = operator_norm_lower_bound(ns.omega, ns.nu, ns.p, ns.n, settings)
        return [
            ResultBlock(
                kind="extremal",
                title=(
                    f"norm lower bounds of P for omega={format_weight(ns.omega)}"
                    f" on L^{ns.p:g} of nu={format_weight(ns.nu)}"
                ),
                values={"p": ns.p, "sup": float(np.max(ratios))},
                columns=["n", "ratio"],
                rows=[[n, r] for n, r in enumerate(ratios)],
            )
        ]
    if ns.operator != "T+" and ns.k:
        raise UsageError("--k applies to the T+ operator only")
    f = PolarGridFunction.load(ns.input)
    result = PROJECTIONS[ns.operator](ns, f, settings)
    rows = [
        [z.real, z.imag, complex(v).real, complex(v).imag, b]
        for z, v, b in zip(result.targets, result.values, result.error_bounds)
    ]
    return [
        ResultBlock(
            kind="projection",
            title=f"{ns.operator} of {ns.input} with omega={format_weight(ns.omega)}",
            values={"operator": ns.operator, "k": ns.k, "samples": int(f.points.size)},
            columns=["z_re", "z_im", "re", "im", "error_bound"],
            rows=rows,
        )
    ]


def _exp_classify(
    ns: argparse.Namespace, settings: ToolkitSettings
) -> List[ResultBlock]:
    params = ExpWeightParams(
        ns.p,
        ns.nu["alpha"],
        ns.nu["beta"],
        ns.nu["l"],
        ns.omega["alpha"],
        ns.omega["beta"],
        ns.omega["l"],
    )
    if ns.corroborate is None:
        report = classify(params, settings)
    else:
        report = corroborate(params, ns.corroborate, settings)
    values = {"verdict": report.verdict, "branch": report.branch, **report.numbers}
    record = report.corroboration
    if record is not None:
        values.update(
            {
                "corroboration_n": record.n_max,
                "corroboration_trend": record.trend if record.trend else "none",
                "corroboration_consistent": (
                    "unavailable" if record.consistent is None else record.consistent
                ),
                "corroboration_sup": record.sup_estimate,
                "corroboration_reason": record.reason,
            }
        )
    return [
        ResultBlock(
            kind="exp-classify",
            title=(
                f"P_omega on L^{params.p:g}_nu, nu=exp({params.alpha:g},{params.beta:g},"
                f"{params.l:g}), omega=exp({params.alpha_t:g},{params.beta_t:g},"
                f"{params.l_t:g})"
            ),
            values=values,
            notes=list(report.notes),
        )
    ]


def _suite(ns: argparse.Namespace, settings: ToolkitSettings) -> List[ResultBlock]:
    report = run_battery(settings, ns.quick, ns.seed, ns.checks)
    return [
        ResultBlock(
            kind="suite",
            title="acceptance battery" + (" (quick)" if ns.quick else ""),
            values={
                "passed": report.passed,
                "checks": len(report.results),
                "failures": len(report.failures),
                "seed": ns.seed,
            },
            columns=["criterion", "subject", "passed", "detail"],
            rows=[[r.criterion, r.subject, r.passed, r.detail] for r in report.results],
        )
    ]


def _add_pair(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--omega", type=_weight, required=True, help="weight ω")
    parser.add_argument("--nu", type=_weight, required=True, help="weight ν")
    parser.add_argument("--p", type=float, required=True, help="exponent p > 1")


def build_parser() -> argparse.ArgumentParser:
    """The full argument grammar of the command."""
    parser = argparse.ArgumentParser(
        prog="radial-bergman",
        description="Numerical diagnostics for weighted Bergman projections.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--format",
        choices=[f.value for f in OutputFormat],
        default=OutputFormat.text.value,
        help="report format (default text)",
    )
    parser.add_argument("--output", help="write the report to this file")
    parser.add_argument(
        "--seed", type=int, default=0, help="seed of every random draw (default 0)"
    )
    parser.add_argument(
        "--rel-tol", type=float, help="override the quadrature relative tolerance"
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v info, -vv debug"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("moments", help="moments and tail integrals of a weight")
    p.add_argument("--weight", type=_weight, required=True)
    p.add_argument("--x", type=float, nargs="+", required=True, help="moment orders")
    p.add_argument("--tail", type=float, nargs="+", help="radii of tail integrals")
    p.set_defaults(handler=_moments)

    p = commands.add_parser("classify-weight", help="D̂, Ď, M and D membership tests")
    p.add_argument("--weight", type=_weight, required=True)
    p.add_argument(
        "--class",
        dest="classes",
        nargs="+",
        choices=[c.value for c in ClassName],
        default=[c.value for c in ClassName],
    )
    p.add_argument("--K", type=float, default=2.0, help="first K of the ladder")
    p.set_defaults(handler=_classify_weight)

    p = commands.add_parser("condition", help="D_p, A_p or M_p profile of a pair")
    p.add_argument("criterion", choices=["dp", "ap", "mp"])
    _add_pair(p)
    p.add_argument("--n", type=int, default=200, help="largest index of dp")
    p.add_argument("--dense", action="store_true", help="quarter-integer dp indices")
    p.add_argument("--radii", type=float, nargs="+", help="radii of ap and mp")
    p.set_defaults(handler=_condition)

    p = commands.add_parser("kernel", help="reproducing kernel and its derivatives")
    p.add_argument("--weight", type=_weight, required=True)
    p.add_argument("--z", type=_complex, required=True, help="point z, e.g. -0.2+0.4j")
    p.add_argument("--zeta", type=_complex, required=True, help="point ζ")
    p.add_argument("--k", type=int, nargs="+", default=[0], help="derivative orders")
    p.add_argument("--tol", type=float)
    p.set_defaults(handler=_kernel)

    p = commands.add_parser("project", help="projections of grid or extremal functions")
    modes = p.add_subparsers(dest="mode", required=True)
    g = modes.add_parser("grid", help="P, P+ or T+ of a polar grid file")
    g.add_argument("--omega", type=_weight, required=True)
    g.add_argument("--input", required=True, help="polar grid file")
    g.add_argument(
        "--z",
        type=_complex,
        nargs="+",
        required=True,
        help="targets, e.g. 0.3 -0.2+0.4j",
    )
    g.add_argument("--operator", choices=sorted(PROJECTIONS), default="P")
    g.add_argument("--k", type=int, default=0)
    g.add_argument("--tol", type=float)
    e = modes.add_parser("extremal", help="norm lower bounds from extremal functions")
    _add_pair(e)
    e.add_argument("--n", type=int, default=50)
    p.set_defaults(handler=_project)

    p = commands.add_parser("exp-classify", help="boundedness for exponential pairs")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--nu", type=_exp_params, required=True, help="alpha=..,beta=..,l=..")
    p.add_argument(
        "--omega", type=_exp_params, required=True, help="alpha=..,beta=..,l=.."
    )
    p.add_argument(
        "--corroborate", type=int, metavar="N", help="check against D_p up to N >= 100"
    )
    p.set_defaults(handler=_exp_classify)

    p = commands.add_parser("suite", help="run the acceptance battery")
    p.add_argument("--quick", action="store_true", help="shorter profiles and grids")
    p.add_argument("--check", dest="checks", nargs="+", choices=list(CHECKS))
    p.set_defaults(handler=_suite)
    return parser


def _settings(ns: argparse.Namespace) -> ToolkitSettings:
    settings = Settings.get()
    if ns.rel_tol is not None:
        if not ns.rel_tol > 0:
            raise UsageError(f"--rel-tol must be > 0, got {ns.rel_tol}")
        settings = settings.copy(update={"quad_rel_tol": ns.rel_tol})
    return settings


def _configure_logging(verbose: int, settings: ToolkitSettings) -> None:
    if verbose:
        level = logging.DEBUG if verbose > 1 else logging.INFO
    else:
        level = logging.getLevelName(settings.log_level.upper())
    logging.basicConfig(
        level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr
    )


def run(
    argv: Optional[Sequence[str]] = None,
    stdout: Optional[TextIO] = None,
    stderr: Optional[TextIO] = None,
) -> int:
    """Parse `argv`, run the subcommand and emit its report.

    Returns:
        0 on success, 1 when a battery check fails or on an unexpected error,
        2 on a usage error, 3 on an accuracy error, 4 on a domain error.
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    stderr = stderr or sys.stderr
    try:
        ns = build_parser().parse_args([_shield_negative(a) for a in argv])
    except SystemExit as e:
        return int(e.code or 0)
    started = time.perf_counter()
    try:
        settings = _settings(ns)
        _configure_logging(ns.verbose, settings)
        blocks = ns.handler(ns, settings)
        doc = ReportDocument(
            tool_version=__version__,
            command=argv,
            generated_at=now_to_rfc3339_str(),
            elapsed_seconds=time.perf_counter() - started,
            settings=settings.dict(),
            results=blocks,
        )
        emit(doc, ns.format, ns.output, stdout)
    except Exception as e:
        return handle_exception(e, stream=stderr)
    if ns.command == "suite" and not doc.results[0].values["passed"]:
        return EXIT_FAILURE
    return EXIT_OK


def main() -> None:
    """Console-script entry point."""
    sys.exit(run())
