"""Exception hierarchy shared by the sampling modules."""


class TKdVError(Exception):
    """Base class for all package errors."""


class InvalidStateError(TKdVError, ValueError):
    """A state vector violates its invariants (e.g. not unit norm)."""


class ResolutionError(TKdVError, ValueError):
    """Physical grid too coarse to resolve the retained modes."""


class DegenerateInputError(TKdVError, ValueError):
    """Zero vector passed where a direction is required."""


class NumericalError(TKdVError, ArithmeticError):
    """A numerical procedure (root finding, optimization) failed."""


class OptimizationError(NumericalError):
    """Simplex search did not converge.

    The best point and value found so far are kept on the exception so a
    caller can decide whether to use them anyway.
    """

    def __init__(self, message, best_x=None, best_value=None):
        super().__init__(message)
        self.best_x = best_x
        self.best_value = best_value


class ConstantViolationError(NumericalError):
    """A proposed point had f/g above the precomputed rejection constant."""

    def __init__(self, message, point=None, log_ratio=None, log_M=None):
        super().__init__(message)
        self.point = point
        self.log_ratio = log_ratio
        self.log_M = log_M


class InsufficientDataError(TKdVError, ValueError):
    """Too few accepted samples for the requested statistic."""
