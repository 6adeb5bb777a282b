"""Exception hierarchy.

Every error raised on purpose by this package derives from
:class:`MinSumError`, so callers can catch one type. Most also derive from a
builtin (``ValueError``, ``ArithmeticError``) for code that only cares about
the broad category.
"""


class MinSumError(Exception):
    """Base class for all package errors."""


class GraphError(MinSumError, ValueError):
    """Invalid graph structure."""


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class NonPositiveWeight(GraphError):
    pass


class Disconnected(GraphError):
    pass


class HasLeaves(GraphError):
    pass


class NotRegular(GraphError):
    pass


class UnequalWeights(GraphError):
    pass


class NotCycle(GraphError):
    pass


class InvalidParameter(MinSumError, ValueError):
    pass


class InvalidInjection(MinSumError, ValueError):
    """Injection of the wrong length or with nonzero total."""


class TooEarly(InvalidParameter):
    """Averaged estimators need a minimum iteration count."""


class VertexInRemovedSet(InvalidParameter):
    pass


class InvalidDepth(InvalidParameter):
    """Computation tree depth out of range or tree too large."""


class NonStochasticMatrix(MinSumError, ValueError):
    pass


class RangeViolation(MinSumError, ValueError):
    """Right-hand side is not in the range of the constraint matrix."""


class ZeroDenominator(MinSumError, ArithmeticError):
    pass


class SingularSystem(MinSumError, ArithmeticError):
    pass


class NotConverged(MinSumError, ArithmeticError):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ParseError(MinSumError, ValueError):
    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.path = path
        self.line = line
