"""Exception types shared across the package."""


class LadderBosonError(Exception):
    """Base class for all package errors."""


class DomainError(LadderBosonError, ValueError):
    """An argument lies outside the domain of an operation."""


class NumericalFailure(LadderBosonError, ArithmeticError):
    """A numerical procedure did not reach the requested accuracy.

    ``tail_estimate`` carries the last truncation-error estimate when one
    is available.
    """

    def __init__(self, message, tail_estimate=None):
        super().__init__(message)
        self.tail_estimate = tail_estimate


class ResourceLimitError(LadderBosonError, MemoryError):
    """A requested computation exceeds the configured size cap."""
