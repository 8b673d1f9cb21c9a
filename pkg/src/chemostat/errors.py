"""Exception hierarchy shared by every analysis module."""


class ChemostatError(Exception):
    """Base class for all errors raised by the package."""


class ParameterError(ChemostatError, ValueError):
    """Invalid biological constants, operating point or configuration."""


class DomainError(ChemostatError, ValueError):
    """A function was evaluated outside the interval where it is defined."""


class BracketError(ChemostatError, ValueError):
    """The supplied interval does not bracket a sign change."""


class ConsistencyError(ChemostatError, RuntimeError):
    """Two independent routes to the same answer disagreed."""


class IntegrationError(ChemostatError, RuntimeError):
    """The ODE integrator could not continue (step size underflow)."""

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state
