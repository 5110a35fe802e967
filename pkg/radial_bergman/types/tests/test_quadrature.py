import math

import pytest

from radial_bergman.types.quadrature import (
    Backend,
    DecayClass,
    IntegralResult,
    QuadratureSpec,
    Substitution,
    combine,
    log1m_exp,
    log_quad,
)


def test_narrow_peak():
    width2 = 1e-8
    result = log_quad(lambda t: -((t - 0.3) ** 2) / (2 * width2), 0.0, 1.0)
    expected = 0.5 * math.log(2 * math.pi * width2)
    assert result.log_value == pytest.approx(expected, rel=1e-9)
    assert result.rel_error < 1e-8


def test_values_beyond_double_range():
    result = log_quad(lambda t: 1000.0 - t, 0.0, math.inf)
    assert result.log_value == pytest.approx(1000.0, abs=1e-9)
    assert result.underflow is False


def test_integrable_endpoint_singularity():
    def log_f(t):
        return -0.5 * math.log(t) if t > 0 else math.inf

    assert log_quad(log_f, 0.0, 1.0).log_value == pytest.approx(math.log(2.0), abs=1e-8)


def test_empty_interval():
    result = log_quad(lambda t: 0.0, 1.0, 1.0)
    assert result.log_value == -math.inf
    assert result.value == 0.0


def test_combine():
    total = combine([IntegralResult(0.0, 1e-10), IntegralResult(0.0, 3e-10)])
    assert total.log_value == pytest.approx(math.log(2.0))
    assert total.rel_error == pytest.approx(2e-10)
    assert combine([]).log_value == -math.inf


def test_underflowing_result():
    result = IntegralResult(-2000.0, 0.1, Backend.asymptotic)
    assert result.underflow
    assert result.value == 0.0


@pytest.mark.parametrize("lam", [-1e-12, -0.1, -0.7, -5.0, -40.0])
def test_log1m_exp(lam):
    assert log1m_exp(lam) == pytest.approx(math.log(-math.expm1(lam)), rel=1e-12)


def test_default_policy():
    spec = QuadratureSpec()
    assert spec.substitution(DecayClass.polynomial) is Substitution.gap
    assert spec.substitution(DecayClass.exponential) is Substitution.exponential
    assert spec.substitution(DecayClass.blowup) is Substitution.logarithmic


def test_policy_must_cover_every_class():
    with pytest.raises(ValueError):
        QuadratureSpec(policy={DecayClass.polynomial: Substitution.gap})
