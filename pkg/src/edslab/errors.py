class EDSError(Exception):
    """Base class for edslab errors."""


class InputError(EDSError, ValueError):
    """Malformed arguments: dimension/arity mismatch, unknown names, bad ranges."""


class DomainError(EDSError):
    """A point lies outside the admissible set, or an evaluator failed there."""


class PreconditionError(EDSError):
    """An operation was called on data violating its precondition
    (e.g. a polar space requested for a non-integral flag)."""


class NumericalInconsistencyError(EDSError):
    """Independent numerical routes disagree, or a theorem-level inequality
    is violated beyond tolerance.  Signals a tolerance or genericity failure."""


class SolverError(EDSError):
    """An iterative solver failed to converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
