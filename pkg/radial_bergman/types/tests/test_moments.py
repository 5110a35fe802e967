import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from scipy.special import expn

from radial_bergman.types.config import ToolkitSettings
from radial_bergman.types.errors import AccuracyError, DomainError
from radial_bergman.types.moments import (
    MomentTable,
    laplace_log_moment,
    log_moment,
    log_moments,
    log_tail_integral,
    log_weighted_tail_integral,
    log_weighted_tail_integral_at,
    moment,
    moment_result,
    tail_integral,
    weighted_tail_integral,
)
from radial_bergman.types.quadrature import Backend
from radial_bergman.types.weights import (
    CompositeWeight,
    ExponentialWeight,
    RapidlyIncreasingWeight,
    StandardWeight,
    TabulatedWeight,
)


@pytest.fixture
def exponential():
    return ExponentialWeight(1.0, 1.0, 1.0)


def test_standard_moments():
    assert moment(StandardWeight(0.0), 3) == pytest.approx(0.25)
    assert moment(StandardWeight(1.0), 3) == pytest.approx(1.0 / 6.0)
    assert moment_result(StandardWeight(1.0), 3).backend is Backend.closed_form


def test_standard_tails():
    assert tail_integral(StandardWeight(0.0), 0.25) == pytest.approx(0.75)
    assert weighted_tail_integral(StandardWeight(0.0), 0.5) == pytest.approx(0.375)
    assert tail_integral(StandardWeight(2.0), 1.0) == 0.0


def test_exponential_moment_against_exponential_integral(exponential):
    # ∫_0^1 exp(-1/(1-s)) ds = ∫_1^∞ e^(-v) v^(-2) dv = E_2(1)
    result = moment_result(exponential, 0.0)
    assert result.backend is Backend.quadrature
    assert result.log_value == pytest.approx(math.log(expn(2, 1.0)), rel=1e-9)


def test_exponential_tail_against_exponential_integral(exponential):
    expected = expn(2, 10.0) / 10.0
    assert log_tail_integral(exponential, 0.9) == pytest.approx(
        math.log(expected), rel=1e-9
    )


def test_asymptotic_backend(exponential):
    result = moment_result(exponential, 2e6)
    assert result.backend is Backend.asymptotic
    assert result.rel_error == pytest.approx(0.1)
    assert result.log_value < -2000.0


def test_laplace_term_tracks_quadrature(exponential):
    quadrature = moment_result(exponential, 2000.0)
    assert laplace_log_moment(exponential, 2000.0) == pytest.approx(
        quadrature.log_value, abs=0.1
    )
    with pytest.raises(DomainError):
        laplace_log_moment(StandardWeight(1.0), 2000.0)


def test_exponential_moments_track_their_asymptotic_shape(exponential):
    # ln ω_{2n} ≈ -2√(2n) - ¾ ln n + const for exp(-1/(1-r))
    ns = np.arange(50, 201, 10)
    gaps = np.array([log_moment(exponential, 2.0 * n) for n in ns])
    gaps -= -0.75 * np.log(ns) - 2.0 * np.sqrt(2.0 * ns)
    assert np.all((gaps > -0.7) & (gaps < -0.35))
    assert np.ptp(gaps) < 0.15
    assert log_moment(exponential, 1e4) == pytest.approx(
        -2.0 * math.sqrt(2.0 * 5000.0), rel=0.1
    )


def test_underflow_returns_zero_with_warning(exponential, caplog):
    with caplog.at_level(logging.WARNING):
        assert moment(exponential, 2e6) == 0.0
    assert "underflows" in caplog.text
    assert math.isfinite(log_moment(exponential, 2e6))


def test_rapidly_increasing_uses_quadrature():
    result = moment_result(RapidlyIncreasingWeight(2.0), 5.0)
    assert result.backend is Backend.quadrature
    assert result.rel_error < 1e-8


def test_tabulated_moments():
    w = TabulatedWeight([0.0, 0.5], [1.0, 1.0])
    assert moment(w, 3.0) == pytest.approx(0.25, rel=1e-9)
    assert tail_integral(w, 0.25) == pytest.approx(0.75, rel=1e-12)


def test_weighted_tails_near_the_boundary():
    lam = -200.0
    # 1 - r² = e^lam (2 - e^lam) with r = 1 - e^lam
    log_gap2 = lam + math.log(2.0)
    assert log_weighted_tail_integral_at(StandardWeight(1.0), lam) == pytest.approx(
        -math.log(2.0) + 2.0 * log_gap2
    )
    ri = RapidlyIncreasingWeight(2.0)
    assert log_weighted_tail_integral_at(ri, lam) == pytest.approx(
        -math.log(1.0 - log_gap2) - math.log(2.0)
    )
    # the same radius rounds to 1 when passed as r
    assert log_weighted_tail_integral(ri, -math.expm1(lam)) == -math.inf


def test_weighted_tail_by_quadrature_near_the_boundary():
    squared = CompositeWeight(((StandardWeight(1.0), 2.0),))
    lam = -60.0
    log_gap2 = lam + math.log(2.0 - math.exp(lam))
    expected = math.log(2.0 / 3.0) + 3.0 * log_gap2
    value = log_weighted_tail_integral_at(squared, lam)
    assert value == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize(
    "weight",
    [
        StandardWeight(0.5),
        ExponentialWeight(1.0, 1.0, 1.0),
        RapidlyIncreasingWeight(3.0),
        CompositeWeight(((StandardWeight(1.0), 2.0),)),
    ],
)
def test_weighted_tail_forms_agree(weight):
    lam = -3.0
    assert log_weighted_tail_integral_at(weight, lam) == pytest.approx(
        log_weighted_tail_integral(weight, -math.expm1(lam)), rel=1e-8
    )
    with pytest.raises(DomainError):
        log_weighted_tail_integral_at(weight, 0.5)


@pytest.mark.parametrize("r", [-0.5, 1.5])
def test_tail_outside_disc(r):
    with pytest.raises(DomainError):
        tail_integral(StandardWeight(1.0), r)


def test_negative_order():
    with pytest.raises(DomainError):
        moment(StandardWeight(1.0), -1.0)


def test_accuracy_error_carries_estimate():
    settings = ToolkitSettings(moment_crossover_rel_error=1e-16, quad_max_subdivisions=1)
    with pytest.raises(AccuracyError) as exc_info:
        moment_result(RapidlyIncreasingWeight(2.0), 3.0, settings)
    assert exc_info.value.estimate > 0.0
    assert exc_info.value.error_bound is not None


def test_vectorised_moments():
    w = StandardWeight(0.5)
    xs = [0.0, 1.0, 2.5, 10.0]
    expected = [log_moment(w, x) for x in xs]
    np.testing.assert_allclose(log_moments(w, xs), expected, rtol=1e-14)


@pytest.mark.parametrize(
    "weight",
    [StandardWeight(1.0), ExponentialWeight(1.0, 0.5), RapidlyIncreasingWeight(2.0)],
)
def test_moment_table_invariants(weight):
    table = MomentTable(weight).fill(range(0, 41))
    assert table.check_invariants() == []
    values = table.log_values(range(0, 41))
    assert np.all(np.diff(values) < 0.0)


def test_moment_table_cache():
    table = MomentTable(RapidlyIncreasingWeight(3.0))
    assert table.entry(4) is table.entry(4.0)
    with ThreadPoolExecutor(max_workers=4) as pool:
        entries = list(pool.map(table.entry, [7.0] * 8))
    assert all(e is entries[0] for e in entries)
    assert [e.x for e in table.entries()] == [4.0, 7.0]
