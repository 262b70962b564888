"""Exception types raised by the package."""


class SteinMVNError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(SteinMVNError, ValueError):
    pass


class SingularCovarianceError(SteinMVNError, ValueError):
    """The sample covariance matrix is (numerically) singular.

    Usually means ``n <= d`` or degenerate data lying in an affine subspace.
    """


class UnsupportedDimensionError(SteinMVNError, ValueError):
    pass


class NumericOverflowError(SteinMVNError, ArithmeticError):
    pass


class AccuracyError(SteinMVNError, ArithmeticError):
    """A numerical approximation failed its internal accuracy check."""


class TooLargeForNaiveError(SteinMVNError, ValueError):
    pass


class ParseError(SteinMVNError, ValueError):
    """Malformed input file; ``row`` and ``column`` are 1-based when known."""

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
