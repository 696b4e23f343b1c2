"""Exception hierarchy shared by every brokerlab module."""


class BrokerLabError(Exception):
    """Base class for all brokerlab failures."""


class ParameterError(BrokerLabError, ValueError):
    """An argument is outside its legal range."""


class PreconditionError(BrokerLabError):
    """An operation was called on inputs that violate its stated precondition."""


class DegenerateDensityError(PreconditionError):
    """A density vanishes where the caller requires it to be positive."""


class NumericalError(BrokerLabError):
    """Base class for quadrature and root-finding failures."""


class EvaluationError(NumericalError):
    """The integrand or objective returned a non-finite value."""


class ConvergenceError(NumericalError):
    """Adaptive refinement hit its depth limit before meeting tolerance."""


class BracketError(NumericalError):
    """Root-finding endpoints do not bracket a sign change."""
