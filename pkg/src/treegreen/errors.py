"""Exception hierarchy for treegreen."""


class TreeGreenError(Exception):
    """Base class for every error raised by this package."""


# graph construction and queries

class GraphError(TreeGreenError, ValueError):
    pass


class CycleDetected(GraphError):
    pass


class Disconnected(GraphError):
    pass


class NonPositiveLength(GraphError):
    pass


class DanglingEndpoint(GraphError):
    pass


class PointAtNode(GraphError):
    pass


class CoincidentPoints(GraphError):
    pass


class NoRootDesignated(GraphError):
    pass


class OutOfDomain(TreeGreenError, ValueError):
    pass


# coefficients and expressions

class ParseError(TreeGreenError, ValueError):
    """Syntax error in a coefficient expression.

    ``position`` is the 0-based character offset at which parsing failed.
    """

    def __init__(self, message, position):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


class UnknownIdentifier(ParseError):
    pass


class ExpressionEvaluationError(TreeGreenError, ValueError):
    pass


class CoefficientError(TreeGreenError, ValueError):
    pass


class NonPositiveP(CoefficientError):
    pass


class NonPositiveRho(CoefficientError):
    pass


class DiscontinuousP(CoefficientError):
    """``p`` takes different values on the edges meeting at a node."""


# ODE integration

class StepSizeUnderflow(TreeGreenError, ArithmeticError):
    pass


class CoefficientEvaluationError(TreeGreenError, ArithmeticError):
    pass


# node conditions and Green's function

class MissingBoundarySpec(TreeGreenError, ValueError):
    pass


class IncompleteTrace(TreeGreenError, KeyError):
    pass


class DegenerateProblem(TreeGreenError, ArithmeticError):
    pass


class NonConstantWronskian(TreeGreenError, ArithmeticError):
    pass


class IntervalDegenerate(DegenerateProblem):
    pass


class QuadratureFailure(TreeGreenError, ArithmeticError):
    pass


# finite-difference oracle

class SingularSystem(TreeGreenError, ArithmeticError):
    pass


# configuration

class ConfigError(TreeGreenError, ValueError):
    """Invalid problem configuration; ``field`` names the offending entry."""

    def __init__(self, message, field=None):
        where = f"{field}: " if field else ""
        super().__init__(where + message)
        self.field = field
