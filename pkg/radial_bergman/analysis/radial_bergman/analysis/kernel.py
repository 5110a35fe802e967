"""Bergman kernels of radial weights from their moments.

The kernel of ω is B_z(ζ) = Σ c_n (z̄ζ)^n with c_n = 1/(2ω_{2n+1}). Series are
truncated where a geometric majorant of the remaining terms falls below the
tolerance; the majorant uses the last coefficient ratio, which is valid once
the ratios are non-increasing.
"""

import logging
import math
from typing import Callable, Optional, Sequence, Tuple, Union

import attr
import numpy as np
from numpy.polynomial import polynomial
from scipy.special import gammaln, logsumexp

from radial_bergman.types.config import Settings, ToolkitSettings
from radial_bergman.types.errors import AccuracyError, DomainError
from radial_bergman.types.moments import MomentTable, log_weighted_tail_integral
from radial_bergman.types.quadrature import QuadratureSpec, log_quad
from radial_bergman.types.weights import RadialWeight, check_radius

logger = logging.getLogger(__name__)

EPS = float(np.finfo(float).eps)
MAX_DERIVATIVE = 8
INITIAL_TERMS = 64
# ratios over this many trailing terms must be non-increasing before the
# geometric majorant is trusted
SETTLED_RATIOS = 8

ComplexLike = Union[complex, float]


@attr.s(frozen=True)
class KernelValue:
    """A kernel value with its certified error bound."""

    value: complex = attr.ib()
    error_bound: float = attr.ib()
    terms: int = attr.ib()


@attr.s(frozen=True)
class SeriesSum:
    """Vectorised series values sharing one truncation."""

    values: np.ndarray = attr.ib(eq=False)
    error_bound: float = attr.ib()
    terms: int = attr.ib()


def _tol(tol: Optional[float], settings: ToolkitSettings) -> float:
    tol = settings.kernel_tol if tol is None else tol
    if not tol > 0:
        raise DomainError(f"tolerance must be > 0, got {tol}")
    return tol


@attr.s
class KernelSeries:
    """Coefficients of the kernel of one weight, backed by a moment table.

    Tolerances are absolute for sums of modulus up to one and relative
    beyond, the series majorant standing in for the modulus.
    """

    weight: RadialWeight = attr.ib()
    settings: Optional[ToolkitSettings] = attr.ib(default=None)
    table: MomentTable = attr.ib(
        default=attr.Factory(
            lambda self: MomentTable(self.weight, self.settings), takes_self=True
        )
    )

    @property
    def _settings(self) -> ToolkitSettings:
        return self.settings or Settings.get()

    def log_coefficients(self, count: int, k: int = 0) -> np.ndarray:
        """ln of c_{m+k} (m+k)!/m! for m = 0..count-1."""
        m = np.arange(count, dtype=float)
        log_c = -math.log(2.0) - self.table.log_values(2.0 * (m + k) + 1.0)
        if k:
            log_c = log_c + gammaln(m + k + 1.0) - gammaln(m + 1.0)
        return log_c

    def coefficient(self, n: int) -> float:
        """c_n = 1/(2ω_{2n+1})."""
        return math.exp(self.log_coefficients(n + 1)[-1])

    def sum(
        self, w: Union[ComplexLike, np.ndarray], k: int = 0, tol: Optional[float] = None
    ) -> SeriesSum:
        """Σ_m c_{m+k} (m+k)!/m! w^m for every w given.

        Raises:
            AccuracyError: the term budget ran out before the tail bound met
                the tolerance; carries the partial sums and their bound.
        """
        settings = self._settings
        tol = _tol(tol, settings)
        w = np.asarray(w, dtype=complex)
        rho = float(np.max(np.abs(w))) if w.size else 0.0
        if rho >= 1.0:
            raise DomainError(f"series argument of modulus {rho} outside the unit disc")
        if rho == 0.0:
            a0 = math.exp(self.log_coefficients(1, k)[0])
            return SeriesSum(np.full(w.shape, a0, dtype=complex), EPS * a0, 1)

        length = INITIAL_TERMS
        while True:
            log_a = self.log_coefficients(length, k)
            log_terms = log_a + np.arange(length) * math.log(rho)
            last = length - 2
            log_ratios = np.diff(log_a)
            slack = 1e-12 + 1e-9 * abs(log_ratios[-1])
            settled = bool(np.all(np.diff(log_ratios[-SETTLED_RATIOS:]) <= slack))
            log_q = log_ratios[-1] + math.log(rho)
            head = log_terms[: last + 1]
            log_majorant = float(logsumexp(head))
            scale = float(np.max(head))
            values = math.exp(scale) * polynomial.polyval(w / rho, np.exp(head - scale))
            rounding = 4.0 * (last + 1) * EPS * math.exp(log_majorant)
            if settled and log_q < 0.0:
                tail = math.exp(log_terms[last + 1]) / -math.expm1(log_q)
                if tail <= tol * max(1.0, math.exp(log_majorant)):
                    return SeriesSum(values, tail + rounding, last + 1)
            else:
                tail = math.inf
            if length >= settings.kernel_max_terms:
                raise AccuracyError(
                    f"kernel series of {self.weight} did not converge within "
                    f"{settings.kernel_max_terms} terms at |w|={rho:.6g}",
                    estimate=values,
                    error_bound=tail,
                )
            length = min(2 * length, settings.kernel_max_terms)
            logger.debug(f"kernel series: growing to {length} terms at |w|={rho:.6g}")


def _disc_point(z: ComplexLike, name: str) -> complex:
    z = complex(z)
    if not abs(z) < 1.0:
        raise DomainError(f"{name}={z} is not in the open unit disc")
    return z


def _cap(z: complex, zeta: complex, settings: ToolkitSettings):
    if abs(z) * abs(zeta) > settings.kernel_max_radius:
        raise DomainError(
            f"|z||ζ| = {abs(z) * abs(zeta):.6g} exceeds {settings.kernel_max_radius}"
        )


def _series(
    omega: RadialWeight, series: Optional[KernelSeries], settings: ToolkitSettings
) -> KernelSeries:
    if series is None:
        return KernelSeries(omega, settings)
    if series.weight != omega:
        raise DomainError("the kernel series belongs to another weight")
    return series


def kernel_eval(
    omega: RadialWeight,
    z: ComplexLike,
    zeta: ComplexLike,
    tol: Optional[float] = None,
    series: Optional[KernelSeries] = None,
    settings: Optional[ToolkitSettings] = None,
) -> KernelValue:
    """B_z(ζ) = Σ c_n (z̄ζ)^n with a certified error bound.

    Raises:
        DomainError: z or ζ outside the disc, or |z||ζ| above the cap.
        AccuracyError: truncation budget exhausted.
    """
    settings = settings or Settings.get()
    z, zeta = _disc_point(z, "z"), _disc_point(zeta, "zeta")
    _cap(z, zeta, settings)
    result = _series(omega, series, settings).sum(z.conjugate() * zeta, 0, tol)
    return KernelValue(complex(result.values), result.error_bound, result.terms)


def kernel_derivative_eval(
    omega: RadialWeight,
    zeta: ComplexLike,
    z: ComplexLike,
    k: int,
    tol: Optional[float] = None,
    series: Optional[KernelSeries] = None,
    settings: Optional[ToolkitSettings] = None,
) -> KernelValue:
    """k-th derivative in z of B_ζ(z), Σ_{n≥k} n!/(n-k)! c_n ζ̄^n z^{n-k}.

    k = 0 is `kernel_eval(omega, zeta, z)`.
    """
    settings = settings or Settings.get()
    if not 0 <= k <= MAX_DERIVATIVE:
        raise DomainError(f"derivative order must lie in [0, {MAX_DERIVATIVE}], got {k}")
    if k == 0:
        return kernel_eval(omega, zeta, z, tol, series, settings)
    z, zeta = _disc_point(z, "z"), _disc_point(zeta, "zeta")
    _cap(z, zeta, settings)
    factor = zeta.conjugate() ** k
    result = _series(omega, series, settings).sum(zeta.conjugate() * z, k, tol)
    return KernelValue(
        complex(factor * result.values), abs(factor) * result.error_bound, result.terms
    )


def kernel_function(
    omega: RadialWeight,
    z: ComplexLike,
    k: int = 0,
    tol: Optional[float] = None,
    series: Optional[KernelSeries] = None,
    settings: Optional[ToolkitSettings] = None,
) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorised w ↦ (B_z)^{(k)}(w), the k-th derivative of w ↦ B_z(w)."""
    settings = settings or Settings.get()
    z = _disc_point(z, "z")
    if not 0 <= k <= MAX_DERIVATIVE:
        raise DomainError(f"derivative order must lie in [0, {MAX_DERIVATIVE}], got {k}")
    series = _series(omega, series, settings)
    factor = z.conjugate() ** k

    def evaluate(w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        if w.size and abs(z) * float(np.max(np.abs(w))) > settings.kernel_max_radius:
            raise DomainError(f"|z||w| exceeds {settings.kernel_max_radius}")
        return factor * series.sum(z.conjugate() * w, k, tol).values

    return evaluate


def integral_mean_M1(
    f: Callable[[np.ndarray], np.ndarray],
    r: float,
    tol: float = 1e-8,
    max_points: int = 2**16,
) -> float:
    """(1/2π) ∫ |f(re^{iθ})| dθ by the trapezoid rule, doubling the points.

    `f` is called with arrays of points on the circle.

    Raises:
        AccuracyError: successive refinements never agreed to `tol`.
    """
    check_radius(r)
    count = 64
    theta = 2.0 * np.pi * np.arange(count) / count
    total = float(np.sum(np.abs(f(r * np.exp(1j * theta)))))
    mean = total / count
    while count < max_points:
        theta = 2.0 * np.pi * (np.arange(count) + 0.5) / count
        total += float(np.sum(np.abs(f(r * np.exp(1j * theta)))))
        count *= 2
        refined = total / count
        if abs(refined - mean) <= tol * max(1.0, refined):
            return refined
        mean = refined
    raise AccuracyError(
        f"integral mean at r={r} did not settle with {max_points} points", estimate=mean
    )


def kernel_mean_estimate(
    omega: RadialWeight,
    z: ComplexLike,
    k: int,
    settings: Optional[ToolkitSettings] = None,
) -> float:
    """E(ω, z, k) = 1 + ∫_0^{|z|} dt / ((1-t)^{k+1} ∫_t^1 sω(s) ds)."""
    settings = settings or Settings.get()
    rz = abs(_disc_point(z, "z"))
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    if rz == 0.0:
        return 1.0

    def log_integrand(t: float) -> float:
        log_tail = log_weighted_tail_integral(omega, t, settings)
        return -(k + 1.0) * math.log1p(-t) - log_tail

    result = log_quad(log_integrand, 0.0, rz, QuadratureSpec.from_settings(settings))
    return 1.0 + result.value


@attr.s(frozen=True)
class KernelMeanBracket:
    """Ratios M₁(s, (B_z)^{(k)}) / E(ω, s|z|, k) over s."""

    s_values: Tuple[float, ...] = attr.ib(converter=tuple)
    ratios: Tuple[float, ...] = attr.ib(converter=tuple)

    @property
    def low(self) -> float:
        """Smallest sampled ratio."""
        return min(self.ratios)

    @property
    def high(self) -> float:
        """Largest sampled ratio."""
        return max(self.ratios)


def kernel_mean_ratios(
    omega: RadialWeight,
    z: ComplexLike,
    k: int,
    s_values: Sequence[float] = tuple(np.linspace(0.5, 0.99, 8)),
    settings: Optional[ToolkitSettings] = None,
) -> KernelMeanBracket:
    """Compare integral means of kernel derivatives with their estimate E."""
    settings = settings or Settings.get()
    z = _disc_point(z, "z")
    series = KernelSeries(omega, settings)
    f = kernel_function(omega, z, k, series=series, settings=settings)
    ratios = []
    for s in s_values:
        mean = integral_mean_M1(f, s)
        estimate = kernel_mean_estimate(omega, s * abs(z), k, settings)
        ratios.append(mean / estimate)
    bracket = KernelMeanBracket(s_values, ratios)
    logger.info(
        f"kernel means of {omega}: ratio bracket [{bracket.low:.4g}, {bracket.high:.4g}]"
    )
    return bracket
