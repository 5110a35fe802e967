"""Projections, norms and the extremal test functions.

Area measure is normalised, ``dA = r dr dθ / π``, so the disc has area 1 and
``∫_D g(|z|) dA = 2 ∫_0^1 g(r) r dr``. The factor 2 is applied here, moments
keep their bare convention.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import attr
import numpy as np
from numpy.polynomial import polynomial
from scipy.special import logsumexp

from radial_bergman.analysis.kernel import (
    MAX_DERIVATIVE,
    KernelSeries,
)
from radial_bergman.types.config import Settings, ToolkitSettings
from radial_bergman.types.errors import DomainError, NotAWeightError
from radial_bergman.types.moments import (
    LogFactor,
    MomentTable,
    log_weighted_integral,
    log_weighted_tail_integral,
    power_of_s,
)
from radial_bergman.types.quadrature import QuadratureSpec, log1m_exp
from radial_bergman.types.weights import RadialWeight, sigma_weight

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)
GRID_FORMAT = "radial-bergman polar grid"


def _ring_nodes(max_gap: float, panels: int, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes in u = 1 - r on panels geometric from u = 1 to `max_gap`."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.logspace(0.0, math.log10(max_gap), panels + 1)
    u: List[np.ndarray] = []
    w: List[np.ndarray] = []
    for hi, lo in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        u.append(0.5 * (hi + lo) + half * nodes)
        w.append(half * weights)
    u_all, w_all = np.concatenate(u), np.concatenate(w)
    order_r = np.argsort(1.0 - u_all)
    return 1.0 - u_all[order_r], w_all[order_r]


@attr.s(frozen=True, eq=False)
class PolarGridFunction:
    """Complex samples on a polar grid of the disc with area quadrature weights.

    Rings are Gauss-Legendre nodes in 1 - r, clustered toward the boundary,
    and ring i carries ``base_ring + ring_step * i`` equispaced angles. The
    panels cover r ≤ 1 - max_gap, so the weights sum to (1 - max_gap)²;
    `r_max` is the outermost node, slightly inside that radius.
    """

    radii: np.ndarray = attr.ib()
    ring_sizes: np.ndarray = attr.ib()
    points: np.ndarray = attr.ib()
    weights: np.ndarray = attr.ib()
    values: np.ndarray = attr.ib()
    params: Dict[str, Any] = attr.ib(factory=dict)

    @classmethod
    def build(
        cls,
        values: Optional[np.ndarray] = None,
        max_gap: float = 1e-8,
        panels: int = 16,
        order: int = 12,
        base_ring: int = 64,
        ring_step: int = 2,
    ) -> "PolarGridFunction":
        """Build the grid; `values` default to zeros."""
        if not 0.0 < max_gap < 1.0:
            raise DomainError(f"max_gap must lie in (0, 1), got {max_gap}")
        radii, radial_weights = _ring_nodes(max_gap, panels, order)
        ring_sizes = base_ring + ring_step * np.arange(len(radii))
        points, weights = [], []
        for r, wr, m in zip(radii, radial_weights, ring_sizes):
            theta = 2.0 * np.pi * np.arange(m) / m
            points.append(r * np.exp(1j * theta))
            weights.append(np.full(m, 2.0 * r * wr / m))
        points_all = np.concatenate(points)
        if values is None:
            values = np.zeros(points_all.shape, dtype=complex)
        values = np.asarray(values, dtype=complex)
        if values.shape != points_all.shape:
            raise DomainError(
                f"expected {points_all.size} samples, got {values.size}"
            )
        params = {
            "max_gap": max_gap,
            "panels": panels,
            "order": order,
            "base_ring": base_ring,
            "ring_step": ring_step,
        }
        return cls(radii, ring_sizes, points_all, np.concatenate(weights), values, params)

    @classmethod
    def from_callable(
        cls, f: Callable[[np.ndarray], np.ndarray], **grid: Any
    ) -> "PolarGridFunction":
        """Sample a vectorised function of z on a grid built with `grid` options."""
        empty = cls.build(**grid)
        return empty.with_values(f(empty.points))

    def with_values(self, values: np.ndarray) -> "PolarGridFunction":
        """Same grid, new values."""
        values = np.broadcast_to(np.asarray(values, dtype=complex), self.points.shape)
        return attr.evolve(self, values=np.array(values))

    @property
    def r_max(self) -> float:
        """Outermost ring."""
        return float(self.radii[-1])

    @property
    def ring_radii(self) -> np.ndarray:
        """Radius of every sample."""
        return np.repeat(self.radii, self.ring_sizes)

    def density(self, w: RadialWeight) -> np.ndarray:
        """Density of `w` at every sample, evaluated once per ring."""
        per_ring = np.array([math.exp(w.log_density(r)) for r in self.radii])
        return np.repeat(per_ring, self.ring_sizes)

    def __add__(self, other: "PolarGridFunction") -> "PolarGridFunction":
        """Pointwise sum on a shared grid."""
        if self.params != other.params:
            raise DomainError("grid functions live on different grids")
        return self.with_values(self.values + other.values)

    def __mul__(self, scalar: complex) -> "PolarGridFunction":
        """Scalar multiple."""
        return self.with_values(scalar * self.values)

    __rmul__ = __mul__

    def save(self, path: Union[str, Path]) -> None:
        """Write columns radius, angle, re, im with a JSON metadata header."""
        meta = {"format": GRID_FORMAT, "samples": int(self.points.size), **self.params}
        header = json.dumps(meta)
        data = np.column_stack(
            (
                np.abs(self.points),
                np.angle(self.points),
                self.values.real,
                self.values.imag,
            )
        )
        np.savetxt(path, data, header=header, fmt="%.17g")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "PolarGridFunction":
        """Read a file written by `save`.

        Raises:
            DomainError: the header is missing or the samples do not match it.
        """
        with open(path) as f:
            first = f.readline()
        try:
            meta = json.loads(first.lstrip("#").strip())
        except json.JSONDecodeError as e:
            raise DomainError(f"{path}: missing grid header") from e
        if meta.pop("format", None) != GRID_FORMAT:
            raise DomainError(f"{path}: not a polar grid file")
        samples = meta.pop("samples")
        data = np.loadtxt(path, ndmin=2)
        grid = cls.build(**meta)
        if data.shape != (samples, 4) or samples != grid.points.size:
            raise DomainError(f"{path}: expected {grid.points.size} samples of 4 columns")
        if not np.allclose(data[:, 0] * np.exp(1j * data[:, 1]), grid.points, atol=1e-12):
            raise DomainError(f"{path}: sample positions do not match the header")
        return grid.with_values(data[:, 2] + 1j * data[:, 3])


@attr.s(frozen=True, eq=False)
class MonomialRadialFunction:
    """f(ζ) = ζ^n φ(|ζ|) with φ ≥ 0 given through ln φ as a function of ln(1 - r).

    `extremal_of` records (ω, ν, p) for the extremal profile
    φ = (r^{(2-p)n} ω/ν)^{1/(p-1)}, whose integrals reduce to moments of σ.
    """

    degree: int = attr.ib()
    log_profile: Callable[[float], float] = attr.ib()
    constant: Optional[float] = attr.ib(default=None)
    extremal_of: Optional[Tuple[RadialWeight, RadialWeight, float]] = attr.ib(
        default=None
    )

    @degree.validator
    def _nonnegative(self, attribute, value):
        if value < 0:
            raise DomainError(f"degree must be >= 0, got {value}")

    @classmethod
    def with_constant(cls, n: int, c: float = 1.0) -> "MonomialRadialFunction":
        """φ ≡ c."""
        if c < 0:
            raise DomainError("φ must be nonnegative")
        log_c = math.log(c) if c > 0 else -math.inf
        return cls(n, lambda lam: log_c, constant=c)

    @classmethod
    def from_callable(
        cls, n: int, phi: Callable[[float], float]
    ) -> "MonomialRadialFunction":
        """φ given as a function of the radius."""

        def log_profile(lam: float) -> float:
            value = phi(-math.expm1(lam))
            if value < 0:
                raise DomainError(f"φ is negative ({value}) at r={-math.expm1(lam)}")
            return math.log(value) if value > 0 else -math.inf

        return cls(n, log_profile)

    @classmethod
    def extremal(
        cls, omega: RadialWeight, nu: RadialWeight, p: float, n: int
    ) -> "MonomialRadialFunction":
        """φ(r) = (r^{(2-p)n} ω(r)/ν(r))^{1/(p-1)}."""
        if not 1.0 < p < math.inf:
            raise DomainError(f"p must lie in (1, inf), got {p}")

        def log_profile(lam: float) -> float:
            log_r = log1m_exp(lam)
            tilt = (2.0 - p) * n * log_r if n and p != 2.0 else 0.0
            return (tilt + omega.log_density_at(lam) - nu.log_density_at(lam)) / (p - 1.0)

        return cls(n, log_profile, extremal_of=(omega, nu, p))

    def __call__(self, z: np.ndarray) -> np.ndarray:
        """Evaluate at the points z."""
        z = np.asarray(z, dtype=complex)
        lam = np.log1p(-np.abs(z))
        phi = np.exp([self.log_profile(float(x)) for x in np.ravel(lam)]).reshape(z.shape)
        return z**self.degree * phi


def _as_coefficients(c) -> np.ndarray:
    return np.atleast_1d(np.asarray(c, dtype=complex))


@attr.s(frozen=True, eq=False)
class AnalyticPolynomial:
    """Σ a_j z^j; `diverged` marks a coefficient that came out infinite."""

    coefficients: np.ndarray = attr.ib(converter=_as_coefficients)
    diverged: bool = attr.ib(default=False)

    @classmethod
    def monomial(
        cls, n: int, c: complex = 1.0, diverged: bool = False
    ) -> "AnalyticPolynomial":
        """c z^n."""
        coefficients = np.zeros(n + 1, dtype=complex)
        coefficients[n] = c
        return cls(coefficients, diverged)

    @property
    def degree(self) -> int:
        """Highest index with a nonzero coefficient."""
        nonzero = np.flatnonzero(self.coefficients)
        return int(nonzero[-1]) if nonzero.size else 0

    def __call__(self, z):
        """Evaluate at z."""
        return polynomial.polyval(np.asarray(z, dtype=complex), self.coefficients)

    def derivative(self, k: int = 1) -> "AnalyticPolynomial":
        """The k-th derivative."""
        if k == 0:
            return self
        if k >= len(self.coefficients):
            return AnalyticPolynomial([0.0])
        return AnalyticPolynomial(polynomial.polyder(self.coefficients, k))

    def jet(self, j: int) -> complex:
        """f^{(j)}(0) = j! a_j."""
        if j >= len(self.coefficients):
            return 0.0
        return complex(math.factorial(j) * self.coefficients[j])


@attr.s(frozen=True)
class NormResult:
    """‖f‖ with its log and relative error; infinite values carry `diverged`."""

    log_value: float = attr.ib()
    rel_error: float = attr.ib(default=0.0)
    diverged: bool = attr.ib(default=False)

    @property
    def value(self) -> float:
        """The norm, inf when the series diverged."""
        return math.inf if self.diverged else math.exp(self.log_value)


def _check_p(p: float, lower: float = 0.0):
    if not lower < p < math.inf:
        raise DomainError(f"p must lie in ({lower:g}, inf), got {p}")


def _factor(*parts: LogFactor) -> LogFactor:
    return lambda lam: sum(part(lam) for part in parts)


def _diverged(log_value: float, rel_error: float) -> bool:
    return not math.isfinite(log_value) and log_value > 0 or rel_error > 1e-2


def _log_angular_mean(
    g: AnalyticPolynomial, p: float
) -> Callable[[float], float]:
    """ln of the circle mean of |g|^p as a function of ln(1 - r)."""
    b = g.coefficients
    if p == 2.0:
        modulus = np.abs(b)
        log_b2 = np.full(b.shape, -np.inf)
        np.log(modulus**2, where=modulus > 0, out=log_b2)
        powers = 2.0 * np.arange(len(b))

        def exact(lam: float) -> float:
            terms = log_b2.copy()
            # the constant term carries r^0 = 1, also at r = 0
            terms[1:] += powers[1:] * log1m_exp(lam)
            return float(logsumexp(terms))

        return exact
    count = max(64, 8 * (len(b) + 1))
    circle = np.exp(2j * np.pi * np.arange(count) / count)

    def sampled(lam: float) -> float:
        r = -math.expm1(lam)
        mean = float(np.mean(np.abs(g(r * circle)) ** p))
        return math.log(mean) if mean > 0 else -math.inf

    return sampled


def _radial_integral(
    nu: RadialWeight, log_factor: LogFactor, spec: QuadratureSpec
) -> Tuple[float, float]:
    """ln of 2 ∫_0^1 ν(s) exp(log_factor) ds and its relative error."""
    result = log_weighted_integral(nu, 0.0, log_factor, spec)
    return LN2 + result.log_value, result.rel_error


Tables = Dict[RadialWeight, MomentTable]


def _table(
    w: RadialWeight, tables: Optional[Tables], settings: ToolkitSettings
) -> MomentTable:
    if tables is None:
        return MomentTable(w, settings)
    if w not in tables:
        tables[w] = MomentTable(w, settings)
    return tables[w]


def _sigma_entry(
    omega: RadialWeight,
    nu: RadialWeight,
    p: float,
    n: int,
    settings: ToolkitSettings,
    tables: Optional[Tables],
):
    """σ_{np'+1}, or None when σ is not a weight."""
    try:
        sigma = sigma_weight(omega, nu, p)
    except NotAWeightError:
        return None
    return _table(sigma, tables, settings).entry(n * p / (p - 1.0) + 1.0)


def lp_norm(
    f: Union[PolarGridFunction, MonomialRadialFunction, AnalyticPolynomial],
    nu: RadialWeight,
    p: float,
    settings: Optional[ToolkitSettings] = None,
    tables: Optional[Tables] = None,
) -> NormResult:
    """‖f‖_{L^p_ν} = (∫_D |f|^p ν dA)^{1/p}.

    Monomial-radial functions reduce to 2∫ φ^p ν s^{np+1} ds and monomials
    c z^n to |c|^p 2ν_{np+1}; p = 2 polynomials use orthogonality. Other
    polynomials integrate their circle means radially and grids sum their
    samples. Moment tables in `tables` are reused and extended.
    """
    settings = settings or Settings.get()
    _check_p(p)
    spec = QuadratureSpec.from_settings(settings)

    if isinstance(f, PolarGridFunction):
        mass = np.abs(f.values) ** p * f.density(nu) * f.weights
        total = float(np.sum(mass))
        log_p = math.log(total) if total > 0 else -math.inf
        return NormResult(log_p / p)

    if isinstance(f, MonomialRadialFunction):
        n = f.degree
        if f.extremal_of is not None and f.extremal_of[1:] == (nu, p):
            entry = _sigma_entry(f.extremal_of[0], nu, p, n, settings, tables)
            if entry is None:
                return NormResult(math.inf, diverged=True)
            return NormResult((LN2 + entry.log_value) / p, entry.rel_error / p)
        if f.constant is not None:
            if f.constant == 0:
                return NormResult(-math.inf)
            entry = _table(nu, tables, settings).entry(n * p + 1.0)
            log_p = p * math.log(f.constant) + LN2 + entry.log_value
            return NormResult(log_p / p, entry.rel_error / p)
        log_p, err = _radial_integral(
            nu, _factor(lambda lam: p * f.log_profile(lam), power_of_s(n * p + 1.0)), spec
        )
        if _diverged(log_p, err):
            return NormResult(math.inf, err, diverged=True)
        return NormResult(log_p / p, err / p)

    if f.diverged or not np.all(np.isfinite(f.coefficients)):
        return NormResult(math.inf, diverged=True)
    nonzero = np.flatnonzero(f.coefficients)
    if nonzero.size == 0:
        return NormResult(-math.inf)
    log_a = np.log(np.abs(f.coefficients[nonzero]))
    table = _table(nu, tables, settings)
    if nonzero.size == 1:
        entry = table.entry(int(nonzero[0]) * p + 1.0)
        log_p = p * log_a[0] + LN2 + entry.log_value
        return NormResult(float(log_p) / p, entry.rel_error / p)
    if p == 2.0:
        entries = [table.entry(2.0 * n + 1.0) for n in nonzero]
        logs = 2.0 * log_a + np.array([e.log_value for e in entries])
        err = max(e.rel_error for e in entries)
        return NormResult((LN2 + float(logsumexp(logs))) / 2.0, err / 2.0)
    log_p, err = _radial_integral(
        nu, _factor(_log_angular_mean(f, p), power_of_s(1.0)), spec
    )
    return NormResult(log_p / p, err / p)


def project_monomial_radial(
    omega: RadialWeight,
    f: MonomialRadialFunction,
    settings: Optional[ToolkitSettings] = None,
    tables: Optional[Tables] = None,
) -> AnalyticPolynomial:
    """P_ω(ζ^n φ) = c z^n with c = ∫_0^1 ω φ s^{2n+1} ds / ω_{2n+1}.

    A divergent numerator gives an infinite coefficient flagged `diverged`.
    """
    settings = settings or Settings.get()
    n = f.degree
    if f.constant is not None:
        return AnalyticPolynomial.monomial(n, f.constant)
    denominator = _table(omega, tables, settings).entry(2.0 * n + 1.0).log_value
    if f.extremal_of is not None and f.extremal_of[0] == omega:
        _, nu, p = f.extremal_of
        entry = _sigma_entry(omega, nu, p, n, settings, tables)
        if entry is None:
            return AnalyticPolynomial.monomial(n, math.inf, diverged=True)
        return AnalyticPolynomial.monomial(n, math.exp(entry.log_value - denominator))
    result = log_weighted_integral(
        omega,
        0.0,
        _factor(f.log_profile, power_of_s(2.0 * n + 1.0)),
        QuadratureSpec.from_settings(settings),
    )
    if _diverged(result.log_value, result.rel_error):
        return AnalyticPolynomial.monomial(n, math.inf, diverged=True)
    return AnalyticPolynomial.monomial(n, math.exp(result.log_value - denominator))


def operator_norm_lower_bound(
    omega: RadialWeight,
    nu: RadialWeight,
    p: float,
    N: int,
    settings: Optional[ToolkitSettings] = None,
    tables: Optional[Tables] = None,
) -> np.ndarray:
    """‖P_ω f_n‖/‖f_n‖ in L^p_ν for the extremal f_n, n = 0..N.

    Every ratio is a lower bound of the norm of P_ω on L^p_ν and equals the
    D_p quotient at n; an infinite array is returned when σ is not a weight.
    """
    settings = settings or Settings.get()
    _check_p(p, 1.0)
    if N < 0:
        raise DomainError(f"N must be >= 0, got {N}")
    tables = {} if tables is None else tables
    ratios = []
    for n in range(N + 1):
        f = MonomialRadialFunction.extremal(omega, nu, p, n)
        projected = project_monomial_radial(omega, f, settings, tables)
        if projected.diverged:
            return np.full(N + 1, math.inf)
        numerator = lp_norm(projected, nu, p, settings, tables)
        denominator = lp_norm(f, nu, p, settings, tables)
        ratios.append(math.exp(numerator.log_value - denominator.log_value))
    return np.array(ratios)


@attr.s(frozen=True)
class ProjectionResult:
    """Values at the targets with error estimates."""

    targets: np.ndarray = attr.ib(eq=False)
    values: np.ndarray = attr.ib(eq=False)
    error_bounds: np.ndarray = attr.ib(eq=False)


def _targets(targets) -> np.ndarray:
    targets = np.atleast_1d(np.asarray(targets, dtype=complex))
    if np.any(np.abs(targets) >= 1.0):
        raise DomainError("targets must lie in the open unit disc")
    return targets


def _check_cap(targets: np.ndarray, f: PolarGridFunction, settings: ToolkitSettings):
    worst = float(np.max(np.abs(targets))) * f.r_max
    if worst > settings.kernel_max_radius:
        raise DomainError(
            f"|z| r_max = {worst:.6g} exceeds the kernel cap {settings.kernel_max_radius}"
        )


def _nonnegative(f: PolarGridFunction):
    if np.any(f.values.imag != 0.0) or np.any(f.values.real < 0.0):
        raise DomainError("the maximal operators take nonnegative real functions")


def _outside_mass(omega: RadialWeight, f: PolarGridFunction, settings: ToolkitSettings):
    """2∫_{r_max}^1 ω s ds, the measure of the annulus the grid leaves out."""
    return 2.0 * math.exp(log_weighted_tail_integral(omega, f.r_max, settings))


def _grid_projection(
    omega: RadialWeight,
    f: PolarGridFunction,
    targets,
    tol: Optional[float],
    series: Optional[KernelSeries],
    settings: Optional[ToolkitSettings],
    k: int,
    modulus: bool,
) -> ProjectionResult:
    settings = settings or Settings.get()
    targets = _targets(targets)
    _check_cap(targets, f, settings)
    series = series or KernelSeries(omega, settings)
    measure = f.values * f.density(omega) * f.weights
    abs_measure = float(np.sum(np.abs(measure)))
    f_max = float(np.max(np.abs(f.values), initial=0.0))
    outside = _outside_mass(omega, f, settings) * f_max
    values, bounds = [], []
    for z in targets:
        # conj(B_z(ζ)) = B_ζ(z), a series in ζ̄ z
        w = np.conj(f.points) * z
        result = series.sum(w, k, tol)
        kernel = result.values
        bound = result.error_bound
        if k:
            factor = np.conj(f.points) ** k
            kernel = factor * kernel
            bound *= f.r_max**k
        if modulus:
            kernel = np.abs(kernel)
        values.append(np.sum(measure * kernel))
        kernel_max = float(np.max(np.abs(kernel))) + bound
        bounds.append(abs_measure * bound + outside * kernel_max)
    return ProjectionResult(targets, np.array(values), np.array(bounds))


def project_grid(
    omega: RadialWeight,
    f: PolarGridFunction,
    targets,
    tol: Optional[float] = None,
    series: Optional[KernelSeries] = None,
    settings: Optional[ToolkitSettings] = None,
) -> ProjectionResult:
    """P_ω f(z) = ∫_D f(ζ) conj(B_z(ζ)) ω(ζ) dA(ζ) at every target.

    The error estimate adds the kernel truncation bound to the mass the grid
    leaves out near the boundary.

    Raises:
        DomainError: a target violates the kernel cap against the grid radii.
    """
    return _grid_projection(omega, f, targets, tol, series, settings, 0, False)


def maximal_project_grid(
    omega: RadialWeight,
    f: PolarGridFunction,
    targets,
    tol: Optional[float] = None,
    series: Optional[KernelSeries] = None,
    settings: Optional[ToolkitSettings] = None,
) -> ProjectionResult:
    """P⁺_ω f(z) = ∫_D f(ζ) |B_z(ζ)| ω(ζ) dA(ζ) for f ≥ 0."""
    _nonnegative(f)
    result = _grid_projection(omega, f, targets, tol, series, settings, 0, True)
    return attr.evolve(result, values=result.values.real)


def t_plus_k(
    omega: RadialWeight,
    k: int,
    f: PolarGridFunction,
    targets,
    tol: Optional[float] = None,
    series: Optional[KernelSeries] = None,
    settings: Optional[ToolkitSettings] = None,
) -> ProjectionResult:
    """T⁺_{ω,k} f(z) = (1-|z|)^k ∫_D f(ζ) |(B_ζ)^{(k)}(z)| ω(ζ) dA(ζ) for f ≥ 0."""
    if not 0 <= k <= MAX_DERIVATIVE:
        raise DomainError(f"derivative order must lie in [0, {MAX_DERIVATIVE}], got {k}")
    _nonnegative(f)
    result = _grid_projection(omega, f, targets, tol, series, settings, k, True)
    scale = (1.0 - np.abs(result.targets)) ** k
    return ProjectionResult(
        result.targets, scale * result.values.real, scale * result.error_bounds
    )


def dirichlet_norm(
    f: AnalyticPolynomial,
    nu: RadialWeight,
    k: int,
    p: float,
    settings: Optional[ToolkitSettings] = None,
) -> NormResult:
    """(Σ_{j<k} |f^{(j)}(0)|^p + ∫_D |f^{(k)}|^p (1-|z|)^{kp} ν dA)^{1/p}."""
    settings = settings or Settings.get()
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    _check_p(p)
    jets = [abs(f.jet(j)) ** p for j in range(k)]
    log_parts = [math.log(v) for v in jets if v > 0]
    err = 0.0
    g = f.derivative(k)
    if np.any(g.coefficients != 0):
        log_area, err = _radial_integral(
            nu,
            _factor(_log_angular_mean(g, p), power_of_s(1.0), lambda lam: k * p * lam),
            QuadratureSpec.from_settings(settings),
        )
        log_parts.append(log_area)
    if not log_parts:
        return NormResult(-math.inf)
    return NormResult(float(logsumexp(log_parts)) / p, err / p)


@attr.s(frozen=True)
class LittlewoodPaleyReport:
    """Ratios ‖f‖^p / (|f(0)|^p + ∫|f'|^p (1-|z|)^p ν dA) over test polynomials."""

    degrees: Tuple[int, ...] = attr.ib(converter=tuple)
    monomial_ratios: Tuple[float, ...] = attr.ib(converter=tuple)
    random_ratios: Tuple[float, ...] = attr.ib(default=(), converter=tuple)
    drift_slope: float = attr.ib(default=0.0)

    @property
    def low(self) -> float:
        """Smallest observed ratio."""
        return min(self.monomial_ratios + self.random_ratios)

    @property
    def high(self) -> float:
        """Largest observed ratio."""
        return max(self.monomial_ratios + self.random_ratios)

    @property
    def drifts(self) -> bool:
        """Monotone monomial ratios moving like a power of the degree."""
        diffs = np.diff(self.monomial_ratios)
        monotone = bool(np.all(diffs > 0) or np.all(diffs < 0))
        return monotone and abs(self.drift_slope) >= DRIFT_SLOPE


# |d ln ratio / d ln n| over the upper half of the degrees that counts as drift
DRIFT_SLOPE = 0.25


def littlewood_paley_check(
    nu: RadialWeight,
    p: float = 2.0,
    degrees: Sequence[int] = tuple(range(1, 21)),
    random_count: int = 0,
    seed: Optional[int] = None,
    settings: Optional[ToolkitSettings] = None,
) -> LittlewoodPaleyReport:
    """Compare the L^p_ν norm with the first-order Dirichlet norm.

    Random polynomials (complex normal coefficients up to the largest degree)
    are drawn only when `random_count` > 0 and then need `seed`.
    """
    settings = settings or Settings.get()
    degrees = [int(n) for n in degrees]
    tables: Tables = {}

    def ratio(f: AnalyticPolynomial) -> float:
        norm = lp_norm(f, nu, p, settings, tables)
        dirichlet = dirichlet_norm(f, nu, 1, p, settings)
        return math.exp(p * (norm.log_value - dirichlet.log_value))

    monomials = [ratio(AnalyticPolynomial.monomial(n)) for n in degrees]
    randoms: List[float] = []
    if random_count:
        if seed is None:
            raise DomainError("random test polynomials need an explicit seed")
        rng = np.random.default_rng(seed)
        top = max(degrees)
        for _ in range(random_count):
            a = rng.standard_normal(top + 1) + 1j * rng.standard_normal(top + 1)
            randoms.append(ratio(AnalyticPolynomial(a)))

    upper = degrees[len(degrees) // 2 :]
    slope = 0.0
    if len(upper) >= 2:
        ups = np.log(monomials[len(degrees) // 2 :])
        slope = float(np.polyfit(np.log(upper), ups, 1)[0])
    report = LittlewoodPaleyReport(degrees, monomials, randoms, slope)
    logger.info(
        f"Littlewood-Paley ratios for {nu}: [{report.low:.4g}, {report.high:.4g}],"
        f" drift slope {slope:.3g}"
    )
    return report


__all__ = [
    "AnalyticPolynomial",
    "LittlewoodPaleyReport",
    "MonomialRadialFunction",
    "NormResult",
    "PolarGridFunction",
    "ProjectionResult",
    "dirichlet_norm",
    "littlewood_paley_check",
    "lp_norm",
    "maximal_project_grid",
    "operator_norm_lower_bound",
    "project_grid",
    "project_monomial_radial",
    "t_plus_k",
]
