"""Exception types raised by the package."""


class DomainError(ValueError):
    """Argument outside the domain of a function or distribution."""


class DataError(ValueError):
    """Malformed or non-finite input data."""


class NumericError(ArithmeticError):
    """Training broke down numerically (singular covariance, non-finite bound)."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []
