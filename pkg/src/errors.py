"""
Exception hierarchy shared by every module of the engine.
"""

from typing import Iterable, Optional


class NullRigError(Exception):
    """Base class for all engine errors."""


class ExpressionSyntaxError(NullRigError):
    """Raised when an expression cannot be parsed."""

    def __init__(self, message: str, offset: int, expected: Iterable[str] = ()):
        self.offset = offset
        self.expected = tuple(sorted(set(expected)))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class UnboundIdentifierError(NullRigError):
    """Raised when an expression mentions a name that is not a chart coordinate."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Unknown identifier '{name}'")


class ExpressionDomainError(NullRigError):
    """Raised when a function or operator is evaluated outside its domain."""

    def __init__(self, message: str, subexpression: str = ""):
        self.subexpression = subexpression
        super().__init__(f"{message} in '{subexpression}'" if subexpression else message)


class JetDimensionError(NullRigError):
    """Raised when jets over different variable counts are combined."""


class SingularMetricError(NullRigError):
    """Raised when the metric matrix cannot be inverted."""


class SignatureError(NullRigError):
    """Raised when a metric is not Lorentzian with signature (-,+,...,+)."""


class DegeneratePlaneError(NullRigError):
    """Raised when a tangent plane carries a degenerate metric."""


class NotNullError(NullRigError):
    """Raised when a vector expected to be null is not."""


class TangencyError(NullRigError):
    """Raised when a vector expected to be tangent to L is not."""


class TransversalityError(NullRigError):
    """Raised when the rigging fails to be transverse to L."""


class GramSchmidtBreakdown(NullRigError):
    """Raised when the screen metric is not positive definite."""


class ChartBreakdownError(NullRigError):
    """Raised when a graph parametrization cannot be solved."""


class PreconditionError(NullRigError):
    """Raised when an operation is called outside the hypotheses it needs."""


class ChartExitError(NullRigError):
    """Raised when an integrated curve leaves the chart through a bounded coordinate."""

    def __init__(self, message: str, parameter: float):
        self.parameter = parameter
        super().__init__(f"{message} at parameter {parameter:.6g}")


class StepSizeUnderflowError(NullRigError):
    """Raised when the integrator cannot make progress."""


class ScenarioValidationError(NullRigError):
    """Raised when a scenario description is invalid. Carries field paths."""

    def __init__(self, problems: Iterable[str], name: Optional[str] = None):
        self.problems = list(problems)
        prefix = f"Scenario '{name}' is invalid" if name else "Scenario is invalid"
        super().__init__(prefix + ":\n" + "\n".join(f"  - {p}" for p in self.problems))


class UnknownScenarioError(NullRigError):
    """Raised when a catalog name is not known."""
