"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Raised when a model, schedule, or experiment config is invalid."""


class InstabilityError(RuntimeError):
    """Raised when a regeneration cycle exceeds the hard arrival limit.

    This usually means the queueing system is unstable under the strategy
    being simulated and no truncation schedule was set.
    """
