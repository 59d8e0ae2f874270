"""Exception hierarchy shared by all trotterlab modules."""


class TrotterLabError(Exception):
    """Base class for every error raised by trotterlab."""


class DecompositionError(TrotterLabError):
    """Raised when a matrix has no usable real eigendecomposition.

    ``matrix`` names the offending matrix (``"A"``, ``"B"``, ``"C"``) when the
    decomposition was attempted on behalf of a hypothesis check, else None.
    """

    def __init__(self, msg, matrix=None):
        if matrix is not None:
            msg = f"matrix {matrix}: {msg}"
        super().__init__(msg)
        self.matrix = matrix

    def with_matrix(self, matrix):
        return type(self)(str(self), matrix=matrix)


class NotHyperbolic(DecompositionError):
    """Some eigenvalue has a non-negligible imaginary part."""


class NotDiagonalizable(DecompositionError):
    """The eigenvector matrix is numerically singular."""


class NotInvertible(DecompositionError):
    """Some eigenvalue is numerically zero."""


class IndexOutOfRange(TrotterLabError, IndexError):
    pass


class DimensionMismatch(TrotterLabError, ValueError):
    pass


class UnboundedDomain(TrotterLabError, ValueError):
    """A sup-norm was requested over an unbounded domain."""


class UnboundedSupport(TrotterLabError, ValueError):
    """A support interval was requested for a non-compactly supported term."""


class EmptyOperator(TrotterLabError, ValueError):
    pass


class TermExplosion(TrotterLabError):
    """The term count of a composed operator exceeded the configured cap."""

    def __init__(self, msg, count):
        super().__init__(msg)
        self.count = count


class MTooLarge(TrotterLabError, ValueError):
    pass


class HypothesisViolated(TrotterLabError):
    """The matrix triple does not satisfy the eigenvalue-gap hypothesis."""

    def __init__(self, msg, report):
        super().__init__(msg)
        self.report = report


class ParseError(TrotterLabError, ValueError):
    pass


class NonSquare(ParseError):
    pass
