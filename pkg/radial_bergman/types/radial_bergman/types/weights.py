"""Radial weights on the unit disc.

A weight is a positive integrable function of the radius r in [0, 1). All
kinds evaluate their density through ``lam = ln(1 - r)``; `log_density(r)` is
the convenience entry point.
"""

import abc
import logging
import math
from enum import Enum
from pathlib import Path
from typing import ClassVar, Optional, Tuple, Union

import attr
import numpy as np
from scipy import optimize, special
from scipy.interpolate import PchipInterpolator

from radial_bergman.types.errors import DomainError, NotAWeightError, PreconditionError
from radial_bergman.types.quadrature import DecayClass, log1m_exp, safe_exp

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)

# below this lam, 1 - r rebuilt from r = 1 - e^lam is off by more than 1e-12
LAM_ROUNDING = -8.0


class WeightKind(str, Enum):
    """Closed set of weight families."""

    standard = "standard"
    power = "power"
    exponential = "exponential"
    rapidly_increasing = "rapidly_increasing"
    tabulated = "tabulated"
    composite = "composite"


def _greater_than(bound: float):
    def validator(instance, attribute, value):
        if not value > bound:
            raise DomainError(f"{attribute.name} must be > {bound}, got {value}")

    return validator


def _log_one_minus_r2(lam: float) -> float:
    """ln(1 - r^2) = ln(u) + ln(2 - u) with u = 1 - r = e^lam."""
    if lam == -math.inf:
        return -math.inf
    return lam + math.log(2.0 - math.exp(lam))


def check_radius(r: float, closed: bool = False) -> float:
    """Validate a radius in [0, 1), or [0, 1] when `closed`."""
    upper_ok = r <= 1.0 if closed else r < 1.0
    if not (0.0 <= r and upper_ok):
        raise DomainError(f"radius {r} outside [0, 1{']' if closed else ')'}")
    return float(r)


@attr.s(frozen=True)
class RadialWeight(abc.ABC):
    """Base class of all weight kinds."""

    kind: ClassVar[WeightKind]
    decay_class: ClassVar[DecayClass] = DecayClass.generic

    @abc.abstractmethod
    def log_density_at(self, lam: float) -> float:
        """Log density at the radius r with ln(1 - r) = lam."""
        ...

    def log_density(self, r: float) -> float:
        """Log density at radius r."""
        return self.log_density_at(math.log1p(-r) if r < 1.0 else -math.inf)

    @property
    def positivity_domain(self) -> Tuple[float, float]:
        """Interval of radii where the density is positive."""
        return (0.0, 1.0)

    def closed_log_tail(self, r: float) -> Optional[float]:
        """ln ∫_r^1 w(s) ds in closed form, or None."""
        return None

    def closed_log_weighted_tail(self, r: float) -> Optional[float]:
        """ln ∫_r^1 s w(s) ds in closed form, or None."""
        return None

    def closed_log_weighted_tail_at(self, lam: float) -> Optional[float]:
        """`closed_log_weighted_tail` at the radius with ln(1 - r) = lam.

        Kinds whose closed form needs 1 - r to full relative precision override
        this; the default only trusts r away from the boundary.
        """
        if lam < LAM_ROUNDING:
            return None
        return self.closed_log_weighted_tail(-math.expm1(lam))

    def closed_log_moment(self, x: float) -> Optional[float]:
        """ln ∫_0^1 s^x w(s) ds in closed form, or None."""
        return None

    def closed_log_moments(self, xs: np.ndarray) -> Optional[np.ndarray]:
        """Vectorised `closed_log_moment`, or None."""
        return None

    def laplace_log_moment(self, x: float) -> Optional[float]:
        """Leading-order asymptotic ln ω_x for large x, or None."""
        return None


@attr.s(frozen=True)
class StandardWeight(RadialWeight):
    """(α+1)(1 - r²)^α with α > -1, normalised so that 2∫_0^1 ω(r) r dr = 1."""

    kind = WeightKind.standard
    decay_class = DecayClass.polynomial

    alpha: float = attr.ib(converter=float, validator=_greater_than(-1.0))

    def log_density_at(self, lam: float) -> float:
        """ln((α+1)(1-r²)^α) at r = 1 - e^lam."""
        base = math.log(self.alpha + 1.0)
        if self.alpha == 0.0:
            return base
        return base + self.alpha * _log_one_minus_r2(lam)

    def closed_log_tail(self, r: float) -> Optional[float]:
        """Incomplete-beta form of ln ∫_r^1 ω."""
        a = self.alpha
        if r >= 1.0:
            return -math.inf
        one_minus_r2 = (1.0 - r) * (1.0 + r)
        inc = float(special.betainc(a + 1.0, 0.5, one_minus_r2))
        if inc <= 0.0:
            # regularised beta underflowed: ∫_0^u (α+1)(2t)^α dt = 2^α u^(α+1)
            return a * LN2 + (a + 1.0) * math.log1p(-r)
        log_beta = float(special.betaln(0.5, a + 1.0))
        return math.log(a + 1.0) - LN2 + log_beta + math.log(inc)

    def closed_log_weighted_tail(self, r: float) -> Optional[float]:
        """Closed form of ln ∫_r^1 s ω(s) ds."""
        one_minus_r2 = (1.0 - r) * (1.0 + r)
        if one_minus_r2 <= 0.0:
            return -math.inf
        return -LN2 + (self.alpha + 1.0) * math.log(one_minus_r2)

    def closed_log_weighted_tail_at(self, lam: float) -> Optional[float]:
        """ln((1-r²)^(α+1) / 2) from lam directly."""
        return -LN2 + (self.alpha + 1.0) * _log_one_minus_r2(lam)

    def closed_log_moment(self, x: float) -> Optional[float]:
        """Beta-function form of ln ω_x."""
        a = self.alpha
        return math.log(a + 1.0) - LN2 + float(special.betaln((x + 1.0) / 2.0, a + 1.0))

    def closed_log_moments(self, xs: np.ndarray) -> Optional[np.ndarray]:
        """Vectorised closed_log_moment."""
        a = self.alpha
        xs = np.asarray(xs, dtype=float)
        return math.log(a + 1.0) - LN2 + special.betaln((xs + 1.0) / 2.0, a + 1.0)


@attr.s(frozen=True)
class PowerWeight(RadialWeight):
    """(α+1)(1 - r)^α with α > -1, so that ∫_0^1 ω = 1."""

    kind = WeightKind.power
    decay_class = DecayClass.polynomial

    alpha: float = attr.ib(converter=float, validator=_greater_than(-1.0))

    def log_density_at(self, lam: float) -> float:
        """ln((α+1)(1-r)^α) at r = 1 - e^lam."""
        base = math.log(self.alpha + 1.0)
        if self.alpha == 0.0:
            return base
        return base + self.alpha * lam

    def closed_log_tail(self, r: float) -> Optional[float]:
        """ln (1-r)^(α+1)."""
        if r >= 1.0:
            return -math.inf
        return (self.alpha + 1.0) * math.log1p(-r)

    def closed_log_weighted_tail(self, r: float) -> Optional[float]:
        """Closed form of ln ∫_r^1 s ω(s) ds."""
        if r >= 1.0:
            return -math.inf
        a = self.alpha
        gap = 1.0 - r
        return (a + 1.0) * math.log(gap) + math.log1p(-(a + 1.0) * gap / (a + 2.0))

    def closed_log_weighted_tail_at(self, lam: float) -> Optional[float]:
        """Power-weight weighted tail with 1 - r = e^lam."""
        if lam == -math.inf:
            return -math.inf
        a = self.alpha
        return (a + 1.0) * lam + math.log1p(-(a + 1.0) * math.exp(lam) / (a + 2.0))

    def closed_log_moment(self, x: float) -> Optional[float]:
        """Beta-function form of ln ω_x."""
        a = self.alpha
        return math.log(a + 1.0) + float(special.betaln(x + 1.0, a + 1.0))

    def closed_log_moments(self, xs: np.ndarray) -> Optional[np.ndarray]:
        """Vectorised closed_log_moment."""
        a = self.alpha
        xs = np.asarray(xs, dtype=float)
        return math.log(a + 1.0) + special.betaln(xs + 1.0, a + 1.0)


@attr.s(frozen=True)
class ExponentialWeight(RadialWeight):
    """exp(-α / (1 - r^l)^β) with α > 0, 0 < β ≤ 1 and l > 0."""

    kind = WeightKind.exponential
    decay_class = DecayClass.exponential

    alpha: float = attr.ib(converter=float, validator=_greater_than(0.0))
    beta: float = attr.ib(converter=float, validator=_greater_than(0.0))
    l: float = attr.ib(  # noqa: E741
        default=1.0, converter=float, validator=_greater_than(0.0)
    )

    @beta.validator
    def _beta_at_most_one(self, attribute, value):
        if value > 1.0:
            raise DomainError(f"beta must be <= 1, got {value}")

    def log_gap(self, lam: float) -> float:
        """ln(1 - r^l) for ln(1 - r) = lam."""
        if lam == -math.inf:
            return -math.inf
        if lam < -30.0:
            # 1 - (1 - u)^l = l u (1 - (l - 1) u / 2 + ...)
            u = math.exp(lam)
            return math.log(self.l) + lam + math.log1p(-(self.l - 1.0) * u / 2.0)
        return log1m_exp(self.l * log1m_exp(lam))

    def log_density_at(self, lam: float) -> float:
        """-α (1-r^l)^(-β) at r = 1 - e^lam."""
        return -self.alpha * safe_exp(-self.beta * self.log_gap(lam))

    def boundary_variable(self, r: float) -> float:
        """v = (1 - r^l)^(-β)."""
        return (1.0 - r**self.l) ** (-self.beta)

    def laplace_log_moment(self, x: float) -> Optional[float]:
        """Laplace approximation of ln ∫_0^1 s^x exp(-α/(1-s^l)^β) ds.

        The maximiser of h(u) = x ln(1-u) - α q(u)^(-β), q(u) = 1 - (1-u)^l, is
        found from h'(u) = 0 and the result is h(u*) + ½ ln(2π / |h''(u*)|).
        """
        if x < 1.0:
            return None

        a, b, l = self.alpha, self.beta, self.l

        def q(u):
            return -math.expm1(l * math.log1p(-u))

        def dh(u):
            pull = a * b * l * (1.0 - u) ** (l - 1.0) * q(u) ** (-b - 1.0)
            return pull - x / (1.0 - u)

        lo = 0.5
        while dh(lo) <= 0.0 and lo > 1e-300:
            lo /= 10.0
        hi = 0.5
        while dh(hi) >= 0.0 and hi < 1.0 - 1e-16:
            hi = 1.0 - (1.0 - hi) / 10.0
        u_star = optimize.brentq(dh, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)

        qs = q(u_star)
        one_minus = 1.0 - u_star
        h = x * math.log1p(-u_star) - a * qs ** (-b)
        d2h = -x / one_minus**2 + a * b * l * (
            -(l - 1.0) * one_minus ** (l - 2.0) * qs ** (-b - 1.0)
            - (b + 1.0) * l * one_minus ** (2.0 * l - 2.0) * qs ** (-b - 2.0)
        )
        return h + 0.5 * math.log(2.0 * math.pi / abs(d2h))


@attr.s(frozen=True)
class RapidlyIncreasingWeight(RadialWeight):
    """1 / ((1 - r²) (ln(e / (1 - r²)))^α) with α > 1."""

    kind = WeightKind.rapidly_increasing
    decay_class = DecayClass.blowup

    alpha: float = attr.ib(converter=float, validator=_greater_than(1.0))

    def log_density_at(self, lam: float) -> float:
        """ln of the rapidly increasing density at r = 1 - e^lam."""
        if lam == -math.inf:
            return math.inf
        g = _log_one_minus_r2(lam)
        return -g - self.alpha * math.log(1.0 - g)

    def closed_log_weighted_tail(self, r: float) -> Optional[float]:
        """Closed form of ln ∫_r^1 s ω(s) ds."""
        # with v = 1 + ln(1/(1-s²)), s ω(s) ds = ½ v^(-α) dv
        if r >= 1.0:
            return -math.inf
        v = 1.0 - math.log((1.0 - r) * (1.0 + r))
        return (1.0 - self.alpha) * math.log(v) - math.log(2.0 * (self.alpha - 1.0))

    def closed_log_weighted_tail_at(self, lam: float) -> Optional[float]:
        """Same closed form with v = 1 - ln(1 - r²) taken from lam."""
        v = 1.0 - _log_one_minus_r2(lam)
        return (1.0 - self.alpha) * math.log(v) - math.log(2.0 * (self.alpha - 1.0))


def _as_float_tuple(values) -> Tuple[float, ...]:
    return tuple(float(v) for v in np.asarray(values, dtype=float).ravel())


@attr.s(frozen=True)
class TabulatedWeight(RadialWeight):
    """Monotone cubic interpolation through (radius, value) samples.

    Beyond the last sample the density is held at the last value; below the
    first sample it is held at the first value.
    """

    kind = WeightKind.tabulated
    decay_class = DecayClass.polynomial

    radii: Tuple[float, ...] = attr.ib(converter=_as_float_tuple)
    values: Tuple[float, ...] = attr.ib(converter=_as_float_tuple)
    source: Optional[str] = attr.ib(default=None, eq=False)

    def __attrs_post_init__(self):
        """Validate the samples and build the interpolant."""
        radii, values = np.array(self.radii), np.array(self.values)
        if len(radii) != len(values):
            raise DomainError("radii and values differ in length")
        if len(radii) < 2:
            raise DomainError("a tabulated weight needs at least two samples")
        if np.any(np.diff(radii) <= 0.0):
            raise DomainError("tabulated radii must be strictly increasing")
        if radii[0] < 0.0 or radii[-1] > 1.0:
            raise DomainError("tabulated radii must lie in [0, 1]")
        if np.any(values < 0.0) or not np.any(values > 0.0):
            raise DomainError("tabulated values must be nonnegative and not all zero")
        object.__setattr__(self, "_interp", PchipInterpolator(radii, values))

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "TabulatedWeight":
        """Read a two-column (radius, value) text file."""
        try:
            data = np.loadtxt(path, ndmin=2)
        except (OSError, ValueError) as e:
            raise DomainError(f"cannot read tabulated weight {path}: {e}") from e
        if data.shape[1] != 2:
            raise DomainError(f"{path}: expected two columns, found {data.shape[1]}")
        return cls(data[:, 0], data[:, 1], source=str(path))

    def _value(self, r: float) -> float:
        if r <= self.radii[0]:
            return self.values[0]
        if r >= self.radii[-1]:
            return self.values[-1]
        return max(float(self._interp(r)), 0.0)

    def log_density_at(self, lam: float) -> float:
        """ln of the interpolated profile at r = 1 - e^lam."""
        r = -math.expm1(lam)
        value = self._value(r)
        return math.log(value) if value > 0.0 else -math.inf

    @property
    def positivity_domain(self) -> Tuple[float, float]:
        """Hull of the radii carrying a positive value."""
        positive = [r for r, v in zip(self.radii, self.values) if v > 0.0]
        if self.values[-1] > 0.0:
            return min(positive), 1.0
        return min(positive), max(positive)

    def closed_log_tail(self, r: float) -> Optional[float]:
        """Integral of the interpolant plus the held end values."""
        first, last = self.radii[0], self.radii[-1]
        total = 0.0
        if r < first:
            total += self.values[0] * (first - r)
        lo = min(max(r, first), last)
        total += float(self._interp.integrate(lo, last))
        total += self.values[-1] * (1.0 - max(r, last))
        return math.log(total) if total > 0.0 else -math.inf


Factor = Tuple[RadialWeight, float]


@attr.s(frozen=True)
class CompositeWeight(RadialWeight):
    """exp(log_scale) · Π w_i^(e_i): products and powers of other weights."""

    kind = WeightKind.composite

    factors: Tuple[Factor, ...] = attr.ib(
        converter=lambda fs: tuple((w, float(e)) for w, e in fs)
    )
    log_scale: float = attr.ib(default=0.0, converter=float)

    @factors.validator
    def _not_empty(self, attribute, value):
        if not value:
            raise DomainError("a composite weight needs at least one factor")

    @property
    def decay_class(self) -> DecayClass:  # type: ignore[override]
        """Polynomial when every factor is, generic otherwise."""
        if all(w.decay_class is DecayClass.polynomial for w, _ in self.factors):
            return DecayClass.polynomial
        return DecayClass.generic

    @property
    def _single(self) -> Optional[RadialWeight]:
        if len(self.factors) == 1 and self.factors[0][1] == 1.0:
            return self.factors[0][0]
        return None

    def log_density_at(self, lam: float) -> float:
        """Weighted sum of the factor log-densities."""
        total = self.log_scale
        for w, e in self.factors:
            if e == 0.0:
                continue
            total += e * w.log_density_at(lam)
        return total

    @property
    def positivity_domain(self) -> Tuple[float, float]:
        """Intersection of the factor domains."""
        lo = max(w.positivity_domain[0] for w, _ in self.factors)
        hi = min(w.positivity_domain[1] for w, _ in self.factors)
        return (lo, hi)

    def _scaled(self, value: Optional[float]) -> Optional[float]:
        return None if value is None else value + self.log_scale

    def closed_log_tail(self, r: float) -> Optional[float]:
        """Delegates to a single unit-power factor."""
        single = self._single
        return self._scaled(single.closed_log_tail(r)) if single else None

    def closed_log_weighted_tail(self, r: float) -> Optional[float]:
        """Delegates to a single unit-power factor."""
        single = self._single
        return self._scaled(single.closed_log_weighted_tail(r)) if single else None

    def closed_log_weighted_tail_at(self, lam: float) -> Optional[float]:
        """Delegates to a single unit-power factor."""
        single = self._single
        return self._scaled(single.closed_log_weighted_tail_at(lam)) if single else None

    def closed_log_moment(self, x: float) -> Optional[float]:
        """Delegates to a single unit-power factor."""
        single = self._single
        return self._scaled(single.closed_log_moment(x)) if single else None

    def closed_log_moments(self, xs: np.ndarray) -> Optional[np.ndarray]:
        """Delegates to a single unit-power factor."""
        single = self._single
        if single is None:
            return None
        values = single.closed_log_moments(xs)
        return None if values is None else values + self.log_scale

    def laplace_log_moment(self, x: float) -> Optional[float]:
        """Delegates to a single unit-power factor."""
        single = self._single
        return self._scaled(single.laplace_log_moment(x)) if single else None


def evaluate(w: RadialWeight, r: float) -> float:
    """Density of `w` at radius r ∈ [0, 1)."""
    check_radius(r)
    return safe_exp(w.log_density(r))


def _integrable_at_boundary(w: RadialWeight) -> bool:
    """Test ∫^1 w near r = 1 through g(u) = ln w(1 - u) + ln u.

    An integrable density has g decreasing over the last decades of u.
    """
    lams = [-k * math.log(10.0) for k in range(2, 13)]
    g = [w.log_density_at(lam) + lam for lam in lams]
    if any(v != v or v == math.inf for v in g):
        return False
    if all(v == -math.inf for v in g[-4:]):
        return True
    return g[-1] < g[-4] - 1e-9


def sigma_weight(omega: RadialWeight, nu: RadialWeight, p: float) -> RadialWeight:
    """Return σ = ω^(p') ν^(-p'/p) with 1/p + 1/p' = 1.

    Raises:
        DomainError: p outside (1, ∞).
        PreconditionError: ν vanishes where ω is positive.
        NotAWeightError: σ is not integrable near r = 1.
    """
    if not 1.0 < p < math.inf:
        raise DomainError(f"p must lie in (1, inf), got {p}")
    if omega == nu:
        return omega
    q = p / (p - 1.0)

    if isinstance(omega, ExponentialWeight) and isinstance(nu, ExponentialWeight):
        if math.isclose(omega.beta, nu.beta) and math.isclose(omega.l, nu.l):
            a_sigma = q * (omega.alpha - nu.alpha / p)
            if math.isclose(a_sigma, 0.0, abs_tol=1e-14):
                return StandardWeight(0.0)
            if a_sigma < 0.0:
                raise NotAWeightError(
                    f"sigma ~ exp({-a_sigma:g}/(1-r^l)^beta) grows at r = 1"
                )
            return ExponentialWeight(a_sigma, omega.beta, omega.l)
        if nu.beta > omega.beta:
            raise NotAWeightError(
                f"beta of nu ({nu.beta}) exceeds beta of omega ({omega.beta}):"
                " sigma grows like exp(c/(1-r)^beta_nu)"
            )

    if isinstance(omega, (StandardWeight, PowerWeight)) and type(omega) is type(nu):
        gamma = q * (omega.alpha - nu.alpha / p)
        if gamma <= -1.0:
            raise NotAWeightError(f"sigma ~ (1-r)^{gamma} is not integrable")
        log_scale = (
            q * math.log(omega.alpha + 1.0)
            - (q / p) * math.log(nu.alpha + 1.0)
            - math.log(gamma + 1.0)
        )
        return CompositeWeight(((type(omega)(gamma), 1.0),), log_scale)

    lo_omega, hi_omega = omega.positivity_domain
    lo_nu, hi_nu = nu.positivity_domain
    if lo_nu > lo_omega or hi_nu < hi_omega:
        raise PreconditionError("nu must be positive wherever omega is positive")

    sigma = CompositeWeight(((omega, q), (nu, -q / p)))
    if not _integrable_at_boundary(sigma):
        raise NotAWeightError("sigma = omega^p' nu^(-p'/p) is not integrable near r = 1")
    return sigma
