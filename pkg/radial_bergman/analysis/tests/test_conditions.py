import math

import numpy as np
import pytest

from radial_bergman.analysis.conditions import (
    SIGMA_NOT_A_WEIGHT,
    Criterion,
    Trend,
    ap_profile,
    class_transfer_checks,
    classify_trend,
    dp_sequence,
    holder_floor_check,
    integration_identity_check,
    mp_profile,
)
from radial_bergman.analysis.suite import SUITE_PAIRS
from radial_bergman.types.errors import DomainError, NotAWeightError
from radial_bergman.types.moments import MomentTable
from radial_bergman.types.weights import (
    ExponentialWeight,
    RapidlyIncreasingWeight,
    StandardWeight,
)


@pytest.fixture
def std0():
    return StandardWeight(0.0)


def test_dp_equal_weights_is_one(std0):
    profile = dp_sequence(std0, std0, 2.0, 50)
    assert profile.criterion is Criterion.Dp
    assert profile.axis == tuple(float(n) for n in range(51))
    np.testing.assert_allclose(profile.values, 1.0, rtol=1e-12)
    assert profile.trend.trend is Trend.bounded


def test_dp_bounded_standard_pair():
    profile = dp_sequence(StandardWeight(2.0), StandardWeight(0.0), 2.0, 200)
    assert profile.trend.trend is Trend.bounded
    assert math.isfinite(profile.sup_estimate)


def test_dp_dense_sampling(std0):
    profile = dp_sequence(StandardWeight(1.0), std0, 2.0, 10, dense=True)
    assert len(profile.axis) == 41
    assert profile.axis[1] == 0.25


def test_dp_shares_moment_tables(std0):
    tables = {}
    dp_sequence(StandardWeight(1.0), std0, 2.0, 20, tables=tables)
    assert std0 in tables
    assert isinstance(tables[std0], MomentTable)
    assert tables[std0].entries()


def test_sigma_not_a_weight(std0):
    # σ = ω² ν^{-1} ~ (1-r²)^{-1} is not integrable
    profile = dp_sequence(std0, StandardWeight(1.0), 2.0, 10)
    assert profile.trend.trend is Trend.diverging
    assert profile.reason == SIGMA_NOT_A_WEIGHT
    assert profile.sup_estimate == math.inf
    assert ap_profile(std0, StandardWeight(1.0), 2.0).reason == SIGMA_NOT_A_WEIGHT


def test_dp_rejects_negative_n(std0):
    with pytest.raises(DomainError):
        dp_sequence(std0, std0, 2.0, -1)


@pytest.mark.parametrize(
    "values,trend",
    [
        (np.arange(1.0, 101.0), Trend.diverging),
        (np.full(100, 2.0), Trend.bounded),
        (np.full(10, 2.0), Trend.inconclusive),
    ],
)
def test_classify_trend_on_sequences(values, trend):
    assert classify_trend(values).trend is trend


def test_ap_standard_pair_at_origin():
    # σ = 9(1-r²)^4; weighted tails at 0 are 1/2, 9/10 and 1/2
    profile = ap_profile(StandardWeight(2.0), StandardWeight(0.0), 2.0, radii=[0.0, 0.5])
    assert profile.values[0] == pytest.approx(math.sqrt(1.8), rel=1e-10)


def test_ap_default_grid_starts_at_origin(std0):
    profile = ap_profile(std0, std0, 2.0)
    assert profile.axis[0] == 0.0
    np.testing.assert_allclose(profile.values, 1.0, rtol=1e-8)


def test_mp_equal_constant_weights(std0):
    # inner integral ∫_0^r 4s/(1-s²)² ds = 2/(1-r²) - 2, σ tail (1-r²)/2
    profile = mp_profile(std0, std0, 2.0, radii=[0.0, 0.5])
    assert profile.values[0] == pytest.approx(math.sqrt(0.5), rel=1e-9)
    assert profile.values[1] == pytest.approx(math.sqrt(0.625), rel=1e-7)


def test_holder_floors():
    report = holder_floor_check(StandardWeight(2.0), StandardWeight(0.0), 2.0, N=30)
    assert report.holds()
    assert report.dp_slack == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(NotAWeightError):
        holder_floor_check(StandardWeight(0.0), StandardWeight(1.0), 2.0)


def test_integration_identity_constant_weight(std0):
    report = integration_identity_check(std0, std0, 2.0)
    assert report.t_values == (0.0, 0.5, 0.9)
    assert report.rhs[0] == pytest.approx(math.sqrt(2.0))
    assert report.max_rel_error < 1e-5


def test_integration_identity_standard_pair():
    report = integration_identity_check(StandardWeight(1.0), StandardWeight(0.0), 2.0)
    assert report.max_rel_error < 1e-5
    assert not report.skipped


@pytest.mark.parametrize("pair", SUITE_PAIRS, ids=[pair.name for pair in SUITE_PAIRS])
def test_integration_identity_on_suite_pairs(pair):
    report = integration_identity_check(pair.omega, pair.nu, pair.p)
    assert not report.skipped
    assert report.max_rel_error < 1e-5


@pytest.mark.parametrize("alpha", [2.0, 3.0])
def test_integration_identity_rapidly_increasing(alpha):
    # σ = ω decays so slowly in τ = -ln(1 - s) that the integrand still
    # carries mass where s itself rounds to 1
    w = RapidlyIncreasingWeight(alpha)
    report = integration_identity_check(w, w, 2.0)
    assert report.rhs[0] == pytest.approx(2.0 / math.sqrt(2.0 * (alpha - 1.0)))
    assert report.max_rel_error < 1e-5


def test_class_transfer_on_bounded_pair():
    report = class_transfer_checks(StandardWeight(2.0), StandardWeight(0.0), 2.0, N=200)
    assert report.dp_trend is Trend.bounded
    names = [c.name for c in report.checks]
    assert names == ["dp_ap_agree", "dhat_transfer", "m_transfer"]
    assert report.passed


@pytest.mark.slow
def test_exponential_pair_equal_weights():
    w = ExponentialWeight(1.0, 0.5, 1.0)
    profile = dp_sequence(w, w, 2.0, 200)
    np.testing.assert_allclose(profile.values, 1.0, rtol=1e-6)
