import math

import pytest

from radial_bergman.types.errors import DomainError, NotAWeightError
from radial_bergman.types.moments import (
    log_s,
    log_weighted_integral,
    no_factor,
    power_of_s,
)
from radial_bergman.types.quadrature import DecayClass
from radial_bergman.types.weights import (
    CompositeWeight,
    ExponentialWeight,
    PowerWeight,
    RapidlyIncreasingWeight,
    StandardWeight,
    TabulatedWeight,
    evaluate,
    sigma_weight,
)


class TestEvaluate:
    def test_standard(self):
        assert evaluate(StandardWeight(1.0), 0.5) == pytest.approx(1.5)
        assert evaluate(StandardWeight(0.0), 0.9) == pytest.approx(1.0)

    def test_exponential(self):
        w = ExponentialWeight(2.0, 0.5, 1.0)
        assert evaluate(w, 0.0) == pytest.approx(math.exp(-2.0))
        assert evaluate(w, 0.75) == pytest.approx(math.exp(-2.0 / math.sqrt(0.25)))
        assert evaluate(w, 1.0 - 1e-12) == 0.0

    def test_rapidly_increasing(self):
        expected = 1.0 / (0.75 * (1.0 - math.log(0.75)) ** 2)
        assert evaluate(RapidlyIncreasingWeight(2.0), 0.5) == pytest.approx(expected)

    def test_tabulated_holds_last_value(self):
        w = TabulatedWeight([0.0, 0.5, 0.8], [1.0, 2.0, 3.0])
        assert evaluate(w, 0.5) == pytest.approx(2.0)
        assert evaluate(w, 0.95) == pytest.approx(3.0)

    @pytest.mark.parametrize("r", [1.0, 1.5, -0.1])
    def test_outside_disc(self, r):
        with pytest.raises(DomainError):
            evaluate(StandardWeight(1.0), r)


@pytest.mark.parametrize(
    "factory",
    [
        lambda: StandardWeight(-1.0),
        lambda: PowerWeight(-2.0),
        lambda: ExponentialWeight(0.0, 0.5),
        lambda: ExponentialWeight(1.0, 1.5),
        lambda: ExponentialWeight(1.0, 0.5, 0.0),
        lambda: RapidlyIncreasingWeight(1.0),
        lambda: TabulatedWeight([0.0, 0.5, 0.5], [1.0, 1.0, 1.0]),
        lambda: TabulatedWeight([0.0, 1.5], [1.0, 1.0]),
        lambda: TabulatedWeight([0.0, 0.5], [1.0, -1.0]),
        lambda: TabulatedWeight([0.0], [1.0]),
        lambda: CompositeWeight(()),
    ],
)
def test_invalid_parameters(factory):
    with pytest.raises(DomainError):
        factory()


def test_tabulated_from_file(tmp_path):
    path = tmp_path / "weight.txt"
    path.write_text("# radius value\n0.0 2.0\n0.5 1.0\n1.0 0.5\n")
    w = TabulatedWeight.from_file(path)
    assert w.values == (2.0, 1.0, 0.5)
    bad = tmp_path / "bad.txt"
    bad.write_text("0.0 1.0 3.0\n0.5 1.0 3.0\n")
    with pytest.raises(DomainError):
        TabulatedWeight.from_file(bad)


@pytest.mark.parametrize("alpha", [-0.5, 0.0, 1.0, 3.0])
@pytest.mark.parametrize("r", [0.0, 0.5, 0.9, 0.999])
def test_standard_tail_matches_quadrature(alpha, r):
    w = StandardWeight(alpha)
    numeric = log_weighted_integral(w, r, no_factor).log_value
    assert numeric == pytest.approx(w.closed_log_tail(r), rel=1e-9, abs=1e-10)
    numeric = log_weighted_integral(w, r, log_s).log_value
    assert numeric == pytest.approx(w.closed_log_weighted_tail(r), rel=1e-9, abs=1e-10)


@pytest.mark.parametrize("alpha", [-0.5, 0.0, 2.0])
@pytest.mark.parametrize("x", [0.0, 1.0, 7.5, 40.0])
def test_power_moments_match_quadrature(alpha, x):
    w = PowerWeight(alpha)
    numeric = log_weighted_integral(w, 0.0, power_of_s(x)).log_value
    assert numeric == pytest.approx(w.closed_log_moment(x), rel=1e-9, abs=1e-10)


@pytest.mark.parametrize("r", [0.0, 0.5, 0.99, 1.0 - 1e-6])
def test_rapidly_increasing_weighted_tail(r):
    w = RapidlyIncreasingWeight(2.0)
    numeric = log_weighted_integral(w, r, log_s).log_value
    assert numeric == pytest.approx(w.closed_log_weighted_tail(r), rel=1e-8, abs=1e-9)


def test_laplace_close_to_quadrature():
    w = ExponentialWeight(1.0, 1.0, 1.0)
    numeric = log_weighted_integral(w, 0.0, power_of_s(1000.0)).log_value
    assert abs(w.laplace_log_moment(1000.0) - numeric) < 0.1
    assert w.laplace_log_moment(0.5) is None


def test_composite_inherits_closed_forms():
    base = StandardWeight(1.0)
    w = CompositeWeight(((base, 1.0),), math.log(3.0))
    expected = math.log(3.0) + base.closed_log_moment(3.0)
    assert w.closed_log_moment(3.0) == pytest.approx(expected)
    assert w.decay_class is DecayClass.polynomial
    squared = CompositeWeight(((base, 2.0),))
    assert squared.closed_log_moment(3.0) is None
    mixed = CompositeWeight(((base, 1.0), (ExponentialWeight(1.0, 0.5), 1.0)))
    assert mixed.decay_class is DecayClass.generic


class TestSigmaWeight:
    def test_same_weight(self):
        w = ExponentialWeight(1.0, 0.5)
        assert sigma_weight(w, w, 2.0) is w

    def test_standard_pair(self):
        sigma = sigma_weight(StandardWeight(2.0), StandardWeight(0.0), 2.0)
        assert evaluate(sigma, 0.5) == pytest.approx(9.0 * 0.75**4)
        assert sigma.closed_log_moment(1.0) is not None

    @pytest.mark.parametrize("alpha_omega,alpha_nu", [(0.0, 1.0), (0.0, 2.0)])
    def test_standard_pair_not_integrable(self, alpha_omega, alpha_nu):
        with pytest.raises(NotAWeightError):
            sigma_weight(StandardWeight(alpha_omega), StandardWeight(alpha_nu), 2.0)

    def test_exponential_pair(self):
        omega = ExponentialWeight(1.0, 0.5)
        assert sigma_weight(omega, ExponentialWeight(1.5, 0.5), 2.0) == ExponentialWeight(
            0.5, 0.5
        )
        flat = sigma_weight(omega, ExponentialWeight(2.0, 0.5), 2.0)
        assert flat == StandardWeight(0.0)
        with pytest.raises(NotAWeightError):
            sigma_weight(omega, ExponentialWeight(3.0, 0.5), 2.0)

    def test_exponential_beta_mismatch(self):
        with pytest.raises(NotAWeightError):
            sigma_weight(ExponentialWeight(1.0, 0.5), ExponentialWeight(1.0, 0.75), 2.0)

    def test_generic_pair(self):
        omega = ExponentialWeight(1.0, 0.75)
        nu = ExponentialWeight(1.0, 0.5)
        sigma = sigma_weight(omega, nu, 2.0)
        assert isinstance(sigma, CompositeWeight)
        r = 0.5
        expected = evaluate(omega, r) ** 2 / evaluate(nu, r)
        assert evaluate(sigma, r) == pytest.approx(expected)

    def test_generic_pair_not_integrable(self):
        with pytest.raises(NotAWeightError):
            sigma_weight(StandardWeight(1.0), ExponentialWeight(1.0, 0.5), 2.0)

    @pytest.mark.parametrize("p", [1.0, 0.5, math.inf])
    def test_invalid_exponent(self, p):
        with pytest.raises(DomainError):
            sigma_weight(StandardWeight(1.0), StandardWeight(0.0), p)
