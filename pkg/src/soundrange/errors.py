"""Exception types shared across the package."""


class ContractError(ValueError):
    """An argument violates an operation's precondition (bad dimension, bad size...)."""


class UndefinedDirectionError(ContractError):
    """Raised when a direction is requested for the zero vector."""


class NotStrictlyConvexError(ContractError):
    """The dense-sphere method needs p > 1."""


class InconsistentArrivalsError(ValueError):
    """Arrival times that no source could have produced."""


class SolverError(RuntimeError):
    """A solver could not produce an answer with the promised precision."""


class NoSurvivorsError(SolverError):
    """Every coverand was excluded; the initial cover did not contain the source."""


class ConfigError(ValueError):
    """Malformed or inconsistent scenario configuration."""
