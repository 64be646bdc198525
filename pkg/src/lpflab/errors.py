"""Exception hierarchy shared by every module."""


class LabError(Exception):
    """Base class for all errors raised by lpflab."""


class InvalidArgument(LabError, ValueError):
    """An argument is outside the documented domain."""


class PreconditionError(LabError, ValueError):
    """Inputs are individually valid but do not satisfy an operation's precondition."""


class ResourceError(LabError, MemoryError):
    """The request exceeds the configured memory bound."""


class ConstructionFailure(LabError):
    """A constructive search finished without meeting its target.

    The best object found is attached so callers can still inspect it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
