"""Exception types shared across the library."""


class PsiHashError(ValueError):
    """Base class for all library-specific errors."""


class NonPowerOfTwoLength(PsiHashError):
    """Input length must be a power of two for Hadamard transforms."""


class DimensionMismatch(PsiHashError):
    """Operand dimensions are incompatible."""


class RowCountExceedsDimension(PsiHashError):
    """Requested more output rows than the input dimension allows."""


class InvalidStructure(PsiHashError):
    """A subset structure violates its defining constraints.

    Carries the full constraint report as ``.report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class RowIndexOutOfRange(PsiHashError):
    """A row index lies outside [1, k]."""


class RowsNotDistinct(PsiHashError):
    """A row-pair operation received the same row twice."""


class GraphTooLargeForExact(PsiHashError):
    """Exact coloring was requested above the configured vertex cap."""


class ThetaOutOfRange(PsiHashError):
    """Angle must lie strictly between 0 and pi."""


class InvalidBoundInputs(PsiHashError):
    """Concentration-bound parameters are outside their valid domain."""
