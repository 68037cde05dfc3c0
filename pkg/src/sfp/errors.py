"""Exception hierarchy shared by all sfp modules."""


class SfpError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(SfpError, ValueError):
    """A distribution, model, or configuration parameter is invalid."""


class DomainError(SfpError, ValueError):
    """An evaluation point lies outside the function's domain."""


class DataError(SfpError, ValueError):
    """Input data violates a structural contract (ordering, sign, schema)."""


class InsufficientDataError(DataError):
    """Too few observations for the requested operation."""


class DegenerateDataError(DataError):
    """Data is formally valid but carries no information (zero variance)."""


class ParseError(DataError):
    """A file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericError(SfpError, ArithmeticError):
    """An iterative numerical procedure failed to converge."""


class UsageError(SfpError):
    """Bad command-line invocation."""
