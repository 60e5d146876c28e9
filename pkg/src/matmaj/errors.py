"""Exception types shared across the package."""


class MatmajError(Exception):
    """Base class for all errors raised by matmaj."""


class ValidationError(MatmajError, ValueError):
    """An input violates a documented invariant (sign, normalization, support)."""


class DimensionMismatch(ValidationError):
    """Two objects that must share a dimension do not."""


class ColumnsNotDistinct(ValidationError):
    """Some pair of columns coincides where distinct columns are required."""


class ParseError(ValidationError):
    """A problem file could not be parsed."""

    def __init__(self, message, field=None, line=None):
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.field = field
        self.line = line


class SizeCapExceeded(MatmajError):
    """An object or linear program would exceed the configured size cap."""


class NumericalFailure(MatmajError, ArithmeticError):
    """A numerical routine did not converge or produced an untrustworthy result."""
