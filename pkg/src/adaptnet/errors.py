"""Exception hierarchy for adaptnet."""


class AdaptnetError(Exception):
    """Base class for all errors raised by this package."""


class LinalgError(AdaptnetError):
    """Numerical linear algebra failure (non-convergence, singularity, bad input)."""


class GraphError(AdaptnetError):
    """Invalid network description or a graph-level precondition violation."""


class StabilityError(AdaptnetError):
    """A stability precondition does not hold (non-Hurwitz, non-Schur, ...)."""


class SimulationError(AdaptnetError):
    """Simulation failure: non-finite state, step-size underflow, etc."""


class ConfigError(AdaptnetError):
    """Scenario configuration is malformed or violates a validation rule."""
