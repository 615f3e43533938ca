from typing import Any, Optional


class LatmonError(Exception):
    """Base error; carries a context dict for the failure report."""

    exit_code = 3

    def __init__(self, message: str, context: Optional[dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.context = context or {}


class DomainError(LatmonError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 2


class MissingParameterError(DomainError):
    """A formula branch needs a parameter that was not supplied."""


class PreconditionError(DomainError):
    """An operation's stated precondition does not hold."""


class CapacityError(LatmonError):
    """A table would exceed the configured memory budget."""

    exit_code = 2


class AliasingError(LatmonError):
    """Quadrature grid too coarse for the exactness it promises."""

    exit_code = 2


class CutoffError(LatmonError):
    """A supplied shell table is too small for the requested tolerance."""

    exit_code = 3


class AccuracyError(LatmonError):
    """A refinement loop did not converge."""

    exit_code = 3


class RankDeficiencyError(AccuracyError):
    """Gram–Schmidt met a near-zero norm after all retries."""
