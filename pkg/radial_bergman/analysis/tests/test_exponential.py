import math

import pytest

from radial_bergman.analysis.conditions import Trend
from radial_bergman.analysis.exponential import (
    EXAMPLE_GRID,
    BoundednessVerdict,
    Branch,
    ExpWeightParams,
    bconst,
    classify,
    corroborate,
    positivity_combination,
    rescale_l,
    step3_f,
)
from radial_bergman.types.errors import DomainError, PreconditionError
from radial_bergman.types.weights import ExponentialWeight


@pytest.mark.parametrize("params,branch", EXAMPLE_GRID)
def test_example_grid(params, branch):
    report = classify(params)
    assert report.branch is branch
    assert report.bounded is (branch is Branch.bounded_case)


def test_grid_covers_every_branch():
    assert {branch for _, branch in EXAMPLE_GRID} == set(Branch)


def test_params_build_weights():
    params = ExpWeightParams(2, 1, 0.5, 2, 1, 0.5, 4)
    assert params.q == 2.0
    assert params.nu() == ExponentialWeight(1.0, 0.5, 2.0)
    assert params.omega() == ExponentialWeight(1.0, 0.5, 4.0)
    assert params.manifold_alpha() == pytest.approx(math.sqrt(2.0))


@pytest.mark.parametrize(
    "args",
    [
        (1.0, 1, 1, 1, 1, 1, 1),
        (2, 0, 1, 1, 1, 1, 1),
        (2, 1, 1.5, 1, 1, 1, 1),
        (2, 1, 1, 1, 1, 0, 1),
        (2, 1, 1, -1, 1, 1, 1),
        (math.inf, 1, 1, 1, 1, 1, 1),
    ],
)
def test_params_validation(args):
    with pytest.raises(DomainError):
        ExpWeightParams(*args)


def test_bconst():
    assert bconst(1.0, 1.0, 1.0) == pytest.approx(2.0)
    # B scales like α^{1/(β+1)} and l^{-β/(β+1)}
    assert bconst(4.0, 1.0, 1.0) == pytest.approx(4.0)
    assert bconst(1.0, 1.0, 4.0) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        bconst(1.0, 0.0, 1.0)


def test_rescale_l():
    params = ExpWeightParams(2, 1, 0.5, 4, 0.5, 0.5, 1)
    rescaled = rescale_l(params)
    assert rescaled.l == 1.0
    assert rescaled.alpha == pytest.approx(0.5)
    assert rescale_l(rescaled) is rescaled
    with pytest.raises(PreconditionError):
        rescale_l(ExpWeightParams(2, 1, 0.5, 1, 1, 0.75, 1))


@pytest.mark.parametrize("beta", [0.1, 0.5, 1.0])
@pytest.mark.parametrize("alpha,p", [(1.0, 2.0), (3.0, 1.5), (0.2, 4.0)])
def test_step3_f_vanishes_only_on_the_manifold(alpha, p, beta):
    root = 2.0 * alpha / p
    assert step3_f(root, alpha, p, beta) == pytest.approx(0.0, abs=1e-12)
    for factor in (0.6, 0.9, 1.1, 3.0):
        assert step3_f(factor * root, alpha, p, beta) < 0.0


def test_step3_f_domain():
    with pytest.raises(DomainError):
        step3_f(0.5, 1.0, 2.0, 1.0)


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
@pytest.mark.parametrize("beta", [0.25, 0.75, 1.0])
def test_positivity_combination(p, beta):
    assert positivity_combination(1.0, beta, 1.0, p) > 0.0


def test_classification_numbers():
    report = classify(ExpWeightParams(2, 1, 1, 1, 1.5, 1, 1))
    assert report.verdict is BoundednessVerdict.unbounded
    numbers = report.numbers
    assert numbers["manifold_alpha"] == pytest.approx(1.0)
    assert numbers["f_value"] < 0.0
    assert numbers["race_rate"] == pytest.approx(-2.0 * numbers["f_value"])
    assert numbers["lead_exponent_nu"] == pytest.approx(0.5)

    bounded = classify(ExpWeightParams(2, 1, 0.5, 1, 1, 0.5, 1))
    assert bounded.numbers["race_rate"] == 0.0
    assert bounded.notes == ()


def test_beta_mismatch_rates():
    report = classify(ExpWeightParams(2, 1, 0.5, 1, 1, 0.75, 1))
    assert report.numbers["race_rate"] == pytest.approx(
        positivity_combination(1.0, 0.75, 1.0, 2.0)
    )
    report = classify(ExpWeightParams(2, 1, 0.75, 1, 1, 0.5, 1))
    assert report.numbers["race_rate"] == math.inf


def test_proximity_note():
    report = classify(ExpWeightParams(2, 1, 0.5, 1, 1.0 + 1e-8, 0.5, 1))
    assert report.branch is Branch.alpha_f_negative
    assert len(report.notes) == 1
    assert "bounded manifold" in report.notes[0]


def test_corroborate_requires_long_profile():
    with pytest.raises(PreconditionError):
        corroborate(ExpWeightParams(2, 1, 0.5, 1, 1, 0.5, 1), N=50)


def test_corroborate_sigma_not_a_weight():
    report = corroborate(ExpWeightParams(2, 1, 0.75, 1, 1, 0.5, 1), N=100)
    record = report.corroboration
    assert record.available
    assert record.trend is Trend.diverging
    assert record.consistent
    assert record.sup_estimate == math.inf


@pytest.mark.slow
def test_corroborate_bounded_case():
    report = corroborate(ExpWeightParams(2, 1, 0.5, 1, 1, 0.5, 1), N=200)
    assert report.bounded
    assert report.corroboration.consistent
