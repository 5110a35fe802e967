"""radial_bergman.types.errors module."""

from typing import Optional


class BergmanError(Exception):
    """Generic toolkit error."""

    pass


class DomainError(BergmanError):
    """Argument outside the mathematical domain of an operation (e.g. r >= 1)."""

    pass


class PreconditionError(DomainError):
    """An operation was called with inputs violating its stated precondition."""

    pass


class NotAWeightError(BergmanError):
    """A constructed density is not integrable on [0, 1).

    Raised by `sigma_weight` when (omega / nu^(1/p))^(p') blows up at the boundary;
    criterion evaluators translate it into an infinite (diverging) criterion.
    """

    pass


class WeightSpecError(BergmanError):
    """Malformed weight notation or an unknown key in it."""

    pass


class AccuracyError(BergmanError):
    """A quadrature or series evaluation could not reach the requested tolerance.

    Attributes:
        estimate: best value obtained before giving up.
        error_bound: error estimate attached to `estimate`.
    """

    def __init__(
        self,
        message: str,
        estimate: Optional[complex] = None,
        error_bound: Optional[float] = None,
    ):
        """Create the error with the best estimate obtained so far."""
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound
