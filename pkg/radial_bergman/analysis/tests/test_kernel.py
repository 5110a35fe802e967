import math

import numpy as np
import pytest

from radial_bergman.analysis.kernel import (
    MAX_DERIVATIVE,
    KernelSeries,
    integral_mean_M1,
    kernel_derivative_eval,
    kernel_eval,
    kernel_function,
    kernel_mean_estimate,
    kernel_mean_ratios,
)
from radial_bergman.types.errors import AccuracyError, DomainError
from radial_bergman.types.moments import moment
from radial_bergman.types.weights import (
    ExponentialWeight,
    RapidlyIncreasingWeight,
    StandardWeight,
)


@pytest.fixture
def std0():
    return StandardWeight(0.0)


@pytest.mark.parametrize(
    "alpha,z,zeta,expected",
    [
        # B_z(ζ) = (1 - z̄ζ)^{-(2+α)} for the standard weights
        (0.0, 0.5, 0.4, 1.5625),
        (1.0, 0.5, 1.0 - 1e-3, None),
        (1.0, 1.0 / math.sqrt(2), 1.0 / math.sqrt(2), 8.0),
        (2.5, 0.3j, 0.5, (1.0 + 0.15j) ** -4.5),
    ],
)
def test_kernel_matches_closed_form(alpha, z, zeta, expected):
    if expected is None:
        expected = (1.0 - np.conj(z) * zeta) ** -(2.0 + alpha)
    result = kernel_eval(StandardWeight(alpha), z, zeta)
    assert result.value == pytest.approx(expected, rel=1e-10)
    assert result.error_bound <= 1e-10 * max(1.0, abs(expected))


def test_kernel_at_origin(std0):
    result = kernel_eval(std0, 0.0, 0.7)
    assert result.value == pytest.approx(1.0)
    assert result.terms == 1


def test_kernel_is_hermitian(std0):
    z, zeta = 0.3 + 0.4j, -0.2 + 0.5j
    a = kernel_eval(std0, z, zeta).value
    b = kernel_eval(std0, zeta, z).value
    assert a == pytest.approx(np.conj(b), rel=1e-12)


def test_kernel_derivative(std0):
    # d/dz (1 - ζ̄z)^{-2} = 2ζ̄ (1 - ζ̄z)^{-3}
    assert kernel_derivative_eval(std0, 0.5, 0.0, 1).value == pytest.approx(1.0)
    value = kernel_derivative_eval(std0, 0.5, 0.4, 1).value
    assert value == pytest.approx(1.0 / 0.8**3, rel=1e-10)
    # k = 0 is the kernel itself
    assert kernel_derivative_eval(std0, 0.5, 0.4, 0).value == pytest.approx(1.5625)


def test_series_sum_is_vectorised(std0):
    series = KernelSeries(std0)
    w = np.array([0.0, 0.1, 0.5j])
    result = series.sum(w)
    np.testing.assert_allclose(result.values, (1.0 - w) ** -2, rtol=1e-10)
    assert series.coefficient(3) == pytest.approx(4.0)


def test_kernel_function_reuses_series(std0):
    series = KernelSeries(std0)
    f = kernel_function(std0, 0.5, series=series)
    w = np.array([0.0, 0.4, -0.4])
    np.testing.assert_allclose(f(w), (1.0 - 0.5 * w) ** -2, rtol=1e-10)
    with pytest.raises(DomainError):
        kernel_eval(StandardWeight(1.0), 0.5, 0.4, series=series)


NON_STANDARD = {
    "exp(1,1)": ExponentialWeight(1.0, 1.0),
    "exp(1,0.5)": ExponentialWeight(1.0, 0.5),
    "ri2": RapidlyIncreasingWeight(2.0),
}


@pytest.mark.parametrize("w", list(NON_STANDARD.values()), ids=list(NON_STANDARD))
def test_kernel_of_non_standard_weights(w):
    z, zeta = 0.5 + 0.2j, -0.3 + 0.4j
    series = KernelSeries(w)
    diagonal = kernel_eval(w, z, z, series=series).value
    assert diagonal.real > 0.0
    assert abs(diagonal.imag) <= 1e-12 * diagonal.real
    a = kernel_eval(w, z, zeta, series=series).value
    b = kernel_eval(w, zeta, z, series=series).value
    assert a == pytest.approx(np.conj(b), rel=1e-12)
    # B_0 ≡ c_0 = 1/(2ω₁) and ∂_z B_ζ(0) = ζ̄ c_1 = ζ̄/(2ω₃)
    origin = kernel_eval(w, 0.0, zeta, series=series).value
    assert origin == pytest.approx(1.0 / (2.0 * moment(w, 1.0)), rel=1e-12)
    slope = kernel_derivative_eval(w, zeta, 0.0, 1, series=series).value
    assert slope == pytest.approx(np.conj(zeta) / (2.0 * moment(w, 3.0)), rel=1e-12)


@pytest.mark.parametrize("w", list(NON_STANDARD.values()), ids=list(NON_STANDARD))
def test_kernel_error_bound_holds_against_longer_series(w):
    z, zeta = 0.8, 0.75j
    series = KernelSeries(w)
    loose = kernel_eval(w, z, zeta, tol=1e-4, series=series)
    tight = kernel_eval(w, z, zeta, tol=1e-13, series=series)
    assert tight.terms >= loose.terms
    assert abs(loose.value - tight.value) <= loose.error_bound + tight.error_bound
    for k in (1, 2):
        rough = kernel_derivative_eval(w, zeta, z, k, tol=1e-4, series=series)
        fine = kernel_derivative_eval(w, zeta, z, k, tol=1e-13, series=series)
        assert abs(rough.value - fine.value) <= rough.error_bound + fine.error_bound

@pytest.mark.parametrize(
    "call",
    [
        lambda w: kernel_eval(w, 1.0, 0.0),
        lambda w: kernel_eval(w, 0.5, 1.2j),
        lambda w: kernel_eval(w, 0.99999999, 0.99999999),
        lambda w: kernel_eval(w, 0.5, 0.5, tol=0.0),
        lambda w: kernel_derivative_eval(w, 0.5, 0.5, MAX_DERIVATIVE + 1),
        lambda w: kernel_derivative_eval(w, 0.5, 0.5, -1),
        lambda w: kernel_mean_estimate(w, 0.5, -1),
    ],
)
def test_domain_errors(std0, call):
    with pytest.raises(DomainError):
        call(std0)


def test_integral_mean_of_kernel(std0):
    # M₁(1/2, B_{0.6}) = 1/(1 - 0.3²) for the constant density
    f = kernel_function(std0, 0.6)
    assert integral_mean_M1(f, 0.5) == pytest.approx(1.0 / 0.91, rel=1e-8)


def test_integral_mean_gives_up():
    rng = np.random.default_rng(0)

    def noise(z):
        return rng.standard_normal(np.shape(z))

    with pytest.raises(AccuracyError):
        integral_mean_M1(noise, 0.5, tol=1e-14, max_points=256)


def test_kernel_mean_estimate(std0):
    assert kernel_mean_estimate(std0, 0.0, 1) == 1.0
    # 1 + ∫_0^{1/2} 2 dt / ((1-t)^3 (1+t))
    expected = 3.0 + math.log(3.0) / 4.0
    assert kernel_mean_estimate(std0, 0.5, 1) == pytest.approx(expected, rel=1e-9)


def test_kernel_mean_ratios_are_bracketed():
    bracket = kernel_mean_ratios(StandardWeight(1.0), 0.9, 1)
    assert len(bracket.ratios) == 8
    assert 0.0 < bracket.low <= bracket.high < 100.0
