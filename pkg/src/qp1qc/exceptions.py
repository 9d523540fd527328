"""Exception types raised by the solver."""


class Qp1qcError(Exception):
    """Base class for all errors raised by this package."""


class NonConvergence(Qp1qcError):
    """An iterative method failed to converge."""


class InternalInconsistency(Qp1qcError):
    """Computed quantities contradict a structural guarantee.

    Usually a sign that the tolerance is too tight or too loose for the input.
    """


class PreconditionViolated(Qp1qcError):
    """A routine was called on input outside its domain."""


class DimensionTooLarge(Qp1qcError):
    """The exhaustive oracle was asked to handle too many variables."""
