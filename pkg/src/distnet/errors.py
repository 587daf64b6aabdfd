"""Exception hierarchy shared by all distnet modules."""


class DistNetError(Exception):
    """Base class for library errors."""


class NumericalFailure(DistNetError, ArithmeticError):
    """An eigensolver or factorization did not converge."""


class IndefiniteMatrixError(DistNetError, ValueError):
    """A matrix required to be positive semidefinite is not."""


class PortDisconnectedError(DistNetError):
    """Some port spans two connected components, so the gain is infinite."""

    def __init__(self, message, offending=()):
        super().__init__(message)
        self.offending = tuple(offending)


class InfeasibleAllocationError(DistNetError):
    """No weight vector on the budget simplex gives a finite gain."""
