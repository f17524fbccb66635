"""Exception hierarchy shared by every module of the package."""


class CircinvError(Exception):
    """Base class for all errors raised by circinv."""


class DomainError(CircinvError, ValueError):
    """A parameter lies outside the domain of the operation."""


class RootOnCircle(DomainError):
    """A root of the rational regular part is too close to the unit circle."""


class NotPositive(DomainError):
    """The regular part is not strictly positive on the circle."""


class NoConvergence(CircinvError, ArithmeticError):
    """A refinement loop did not reach its stopping tolerance."""


class QuadratureFailure(NoConvergence):
    pass


class TruncationTooShort(CircinvError, ArithmeticError):
    """A truncated series still has a tail above the requested tolerance."""


TruncationTooSmall = TruncationTooShort


class PoleAtIndex(DomainError):
    pass


class NotPositiveDefinite(CircinvError, ArithmeticError):
    """Levinson recursion met a reflection coefficient of modulus >= 1."""


class SingularMatrix(CircinvError, ArithmeticError):
    pass


class IndexOutOfRange(CircinvError, IndexError):
    pass


class SeriesDiverging(CircinvError, ArithmeticError):
    """Neumann or kernel series increments stopped decreasing."""


class DiagonalSingularity(DomainError):
    """The kernel G is evaluated too close to its diagonal x = y."""


class DegenerateZeros(DomainError):
    pass


class ConfigError(CircinvError, ValueError):
    """Invalid experiment configuration; message lists the offending fields."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
