import io
import json

import pytest

from radial_bergman.cli.errors import (
    DEFAULT_EXIT_CODES,
    UsageError,
    exception_handler_factory,
    exit_code_for,
    handle_exception,
)
from radial_bergman.types.errors import (
    AccuracyError,
    DomainError,
    NotAWeightError,
    PreconditionError,
    WeightSpecError,
)


@pytest.mark.parametrize(
    "exc,code",
    [
        (WeightSpecError("x"), 2),
        (UsageError("x"), 2),
        (AccuracyError("x", estimate=1.0, error_bound=0.1), 3),
        (DomainError("x"), 4),
        (PreconditionError("x"), 4),
        (NotAWeightError("x"), 4),
        (ValueError("x"), 1),
    ],
)
def test_exit_codes(exc, code):
    assert exit_code_for(exc) == code


def test_custom_table():
    table = dict(DEFAULT_EXIT_CODES)
    table[PreconditionError] = 5
    assert exit_code_for(PreconditionError("x"), table) == 5
    assert exit_code_for(DomainError("x"), table) == 4


def test_handler_writes_payload():
    stream = io.StringIO()
    assert exception_handler_factory(7)(DomainError("r >= 1"), stream) == 7
    payload = json.loads(stream.getvalue())
    assert payload == {"code": "DomainError", "description": "r >= 1"}


def test_handle_exception():
    stream = io.StringIO()
    assert handle_exception(AccuracyError("budget"), stream=stream) == 3
    assert json.loads(stream.getvalue())["code"] == "AccuracyError"
