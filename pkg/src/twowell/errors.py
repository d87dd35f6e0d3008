"""Exception types shared across the package."""


class TwoWellError(Exception):
    """Base class for all package errors."""


class DomainError(TwoWellError, ValueError):
    """An input lies outside the domain of an operation."""


class NotInHullError(DomainError):
    """A requested matrix is not in the convex / rank-one hull."""


class ConfigError(TwoWellError, ValueError):
    """A run parameter fails validation.

    ``field`` names the offending parameter when known.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class NumericError(TwoWellError, ArithmeticError):
    """A numerical procedure failed (non-finite values, search exhausted).

    ``last_valid`` carries the last good iterate when there is one.
    """

    def __init__(self, message, last_valid=None):
        super().__init__(message)
        self.last_valid = last_valid


class DecompositionError(NumericError):
    """No laminate decomposition was found."""
