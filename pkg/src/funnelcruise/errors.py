"""Exception hierarchy shared across the package."""


class FunnelCruiseError(Exception):
    """Base class for all errors raised by funnelcruise."""


class FunnelPoleError(FunnelCruiseError, ValueError):
    """The funnel boundary 1/phi is evaluated where phi vanishes."""


class SingularGainError(FunnelCruiseError, ArithmeticError):
    """The tracking error touched or crossed the funnel boundary."""


class OutsideDomainError(FunnelCruiseError):
    """A state (t, x, v) lies outside the controller's admissible set.

    ``reason`` names the violated predicate.
    """

    def __init__(self, t, x, v, reason):
        self.t, self.x, self.v, self.reason = t, x, v, reason
        super().__init__(f"state outside domain at t={t!r} (x={x!r}, v={v!r}): {reason}")


class InitialConditionError(OutsideDomainError):
    """The initial state (0, x0, v0) is not admissible."""


class StepCollapseError(FunnelCruiseError):
    """The adaptive integrator could not make progress above ``h_min``."""

    def __init__(self, message, last_state=None, reason=None, partial=None):
        super().__init__(message)
        self.last_state = last_state
        self.reason = reason
        self.partial = partial


class ScenarioError(FunnelCruiseError):
    pass


class ScenarioParseError(ScenarioError):
    pass


class ScenarioValidationError(ScenarioError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid scenario: " + "; ".join(self.violations))
