"""Exception hierarchy shared by all modules."""


class BoundaryNoiseError(Exception):
    """Base class for errors raised by this package."""


class DomainError(BoundaryNoiseError, ValueError):
    """A point, time or distance lies outside the admissible set."""


class ConfigurationError(BoundaryNoiseError, ValueError):
    """An object or experiment was configured with unsupported parameters."""


class UsageError(BoundaryNoiseError, ValueError):
    """A function was called with arguments of the wrong kind."""


class SingularityError(DomainError):
    """A kernel was evaluated on its diagonal."""


class MonteCarloError(BoundaryNoiseError, RuntimeError):
    """A Monte Carlo sampler produced a non-finite value."""

    def __init__(self, message, seed=None, block=None):
        super().__init__(message)
        self.seed = seed
        self.block = block
