"""Error handling."""

import json
import logging
import sys
from typing import Callable, Dict, Optional, TextIO, Type, TypedDict

from radial_bergman.types.errors import (
    AccuracyError,
    BergmanError,
    DomainError,
    NotAWeightError,
    WeightSpecError,
)

logger = logging.getLogger(__name__)


class UsageError(BergmanError):
    """Command-line arguments that parse but make no sense together."""

    pass


EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_ACCURACY = 3
EXIT_DOMAIN = 4

DEFAULT_EXIT_CODES: Dict[Type[Exception], int] = {
    WeightSpecError: EXIT_USAGE,
    UsageError: EXIT_USAGE,
    AccuracyError: EXIT_ACCURACY,
    DomainError: EXIT_DOMAIN,
    NotAWeightError: EXIT_DOMAIN,
    Exception: EXIT_FAILURE,
}


class ErrorPayload(TypedDict):
    """A JSON error payload written to stderr.

    Attributes:
        code: name of the exception class.
        description: the exception message.
    """

    code: str
    description: str


def exception_handler_factory(exit_code: int) -> Callable[[Exception, TextIO], int]:
    """Create a handler reporting an exception and returning `exit_code`.

    Args:
        exit_code: process exit code for the exception.

    Returns:
        callable: an exception handler.
    """

    def handler(exc: Exception, stream: TextIO) -> int:
        logger.error(exc, exc_info=True)
        payload = ErrorPayload(code=exc.__class__.__name__, description=str(exc))
        stream.write(json.dumps(payload) + "\n")
        return exit_code

    return handler


def exit_code_for(
    exc: Exception, exit_codes: Optional[Dict[Type[Exception], int]] = None
) -> int:
    """Exit code of the closest class of `exc` present in the table."""
    exit_codes = DEFAULT_EXIT_CODES if exit_codes is None else exit_codes
    for cls in type(exc).__mro__:
        if cls in exit_codes:
            return exit_codes[cls]
    return EXIT_FAILURE


def handle_exception(
    exc: Exception,
    exit_codes: Optional[Dict[Type[Exception], int]] = None,
    stream: Optional[TextIO] = None,
) -> int:
    """Report `exc` on `stream` (stderr by default) and return its exit code."""
    handler = exception_handler_factory(exit_code_for(exc, exit_codes))
    return handler(exc, stream or sys.stderr)
