"""Exception hierarchy. Each class maps to one failure mode of the solvers."""


class FracNSError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class InvalidGrid(FracNSError, ValueError):
    pass


class NonPositiveLambda(FracNSError, ValueError):
    pass


class InvalidParams(FracNSError, ValueError):
    exit_code = 3


class InvalidExponents(InvalidParams):
    """Raised when s <= (p - 1) N / (2p), i.e. 2p is not Sobolev-subcritical."""


class ZeroState(FracNSError, ValueError):
    pass


class NonProjectable(FracNSError, ArithmeticError):
    """The interaction D(v) is not positive, so no scaling of v lies on the Nehari set."""

    exit_code = 5


class NonPositiveDenominator(FracNSError, ArithmeticError):
    pass


class ZeroWeight(FracNSError, ValueError):
    pass


class IncompatibleBase(FracNSError, ValueError):
    pass


class NoConvergence(FracNSError, RuntimeError):
    exit_code = 4


class NewtonDiverged(FracNSError, RuntimeError):
    """Continuation lost the branch. ``partial`` holds the results obtained before ``eps``."""

    exit_code = 6

    def __init__(self, eps, partial=None, message=None):
        self.eps = eps
        self.partial = list(partial or [])
        super().__init__(message or f"Newton diverged at eps={eps!r}")


class SchemaError(FracNSError, ValueError):
    exit_code = 2

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ValidityError(InvalidParams):
    exit_code = 3
