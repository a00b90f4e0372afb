"""Exception and warning types shared across the package."""


class TscorrError(Exception):
    """Base class for all tscorr errors."""


class ValidationError(TscorrError, ValueError):
    """Invalid input data or configuration (bad shapes, non-finite values,
    incompatible parameters)."""


class FormatError(ValidationError):
    """Malformed file content: bad magic, size mismatch, duplicate manifest
    entries, unreadable headers."""


class ConvergenceError(TscorrError, RuntimeError):
    """Solver failed to reach its stopping criterion within the iteration
    budget. Carries the final violation measure."""

    def __init__(self, message, violation=None):
        super().__init__(message)
        self.violation = violation


class ShortSeriesWarning(UserWarning):
    """A requested autocorrelation lag is not shorter than the series; the
    coefficient was zero-filled."""
