"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class NumericError(RuntimeError):
    """A numerical routine failed to reach its tolerance.

    The best available estimate is kept on ``best_estimate`` so callers can
    decide whether it is usable.
    """

    def __init__(self, message, best_estimate=None, error_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


class ConfigError(ValueError):
    """An experiment name or parameter set is not recognized."""
