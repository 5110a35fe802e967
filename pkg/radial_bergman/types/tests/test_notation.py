import pytest

from radial_bergman.types.errors import WeightSpecError
from radial_bergman.types.notation import format_weight, parse_params, parse_weight
from radial_bergman.types.weights import (
    ExponentialWeight,
    PowerWeight,
    RapidlyIncreasingWeight,
    StandardWeight,
    TabulatedWeight,
)


@pytest.mark.parametrize(
    "text,expected",
    [
        ("std:alpha=1", StandardWeight(1.0)),
        ("std:alpha=-0.5", StandardWeight(-0.5)),
        ("pow:alpha=2", PowerWeight(2.0)),
        ("exp:alpha=1,beta=0.5,l=1", ExponentialWeight(1.0, 0.5, 1.0)),
        ("exp:alpha=1, beta=0.5", ExponentialWeight(1.0, 0.5)),
        ("ri:alpha=2", RapidlyIncreasingWeight(2.0)),
    ],
)
def test_parse_weight(text, expected):
    assert parse_weight(text) == expected


@pytest.mark.parametrize(
    "text,message",
    [
        ("std:alpha=1,gamma=2", "gamma"),
        ("foo:alpha=1", "foo"),
        ("std:", "alpha"),
        ("exp:alpha=1", "beta"),
        ("std:alpha=one", "one"),
        ("std:alpha", "alpha"),
        ("std:alpha=-2", "alpha"),
        ("exp:alpha=1,beta=2", "beta"),
        ("ri:alpha=1", "alpha"),
        ("std alpha=1", "kind:params"),
        ("std:alpha=1,alpha=2", "twice"),
    ],
)
def test_parse_weight_errors(text, message):
    with pytest.raises(WeightSpecError) as exc_info:
        parse_weight(text)
    assert message in str(exc_info.value)


def test_parse_tabulated(tmp_path):
    path = tmp_path / "flat.txt"
    path.write_text("0.0 1.0\n0.5 1.0\n1.0 1.0\n")
    w = parse_weight(f"tab:{path}")
    assert isinstance(w, TabulatedWeight)
    assert w.radii == (0.0, 0.5, 1.0)
    assert format_weight(w) == f"tab:{path}"


def test_parse_tabulated_missing_file(tmp_path):
    with pytest.raises(WeightSpecError):
        parse_weight(f"tab:{tmp_path / 'missing.txt'}")


def test_parse_params():
    params = parse_params(
        "alpha=1,beta=0.5,l=1", required=("alpha", "beta"), optional=("l",)
    )
    assert params == {"alpha": 1.0, "beta": 0.5, "l": 1.0}
    with pytest.raises(WeightSpecError):
        parse_params("alpha=1,l=1", required=("alpha", "beta"), optional=("l",))


@pytest.mark.parametrize(
    "text", ["std:alpha=1", "pow:alpha=0.5", "exp:alpha=1,beta=0.5,l=2"]
)
def test_format_weight(text):
    assert format_weight(parse_weight(text)) == text
