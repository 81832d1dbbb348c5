"""Exception hierarchy shared by all modules."""


class PNTAPError(Exception):
    """Base class for every error raised by :mod:`pntap`."""


class InvalidModulusError(PNTAPError, ValueError):
    pass


class InvalidResidueError(PNTAPError, ValueError):
    pass


class InvalidConstraintError(PNTAPError, ValueError):
    pass


class DomainError(PNTAPError, ValueError):
    """Argument outside the region where the quantity is defined."""


class PreconditionError(PNTAPError, ValueError):
    pass


class PoleError(DomainError):
    pass


class ResourceLimitError(PNTAPError):
    """Request exceeds a configured cap (sieve range, height, modulus)."""


class InconclusiveContourError(PNTAPError):
    """Argument tracking could not resolve the phase along a contour."""


class StaleInputError(PNTAPError):
    pass


class ConvergenceError(PNTAPError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class NumericalCheckError(PNTAPError):
    """A built-in numerical self-test failed."""


class BoundViolation(PNTAPError, AssertionError):
    pass
