"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid experiment or run configuration. Carries all violations found."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DivergedError(RuntimeError):
    """An optimizer produced a non-finite parameter or particle value.

    ``iteration`` is the 1-based step at which divergence was detected and
    ``trace`` holds the partial run trace when raised from a run loop.
    """

    def __init__(self, message, iteration=None, trace=None):
        super().__init__(message)
        self.iteration = iteration
        self.trace = trace


class MissingMStepError(TypeError):
    """A marginal algorithm was given a model without a closed-form M-step."""


class ParseError(ValueError):
    """A data file could not be parsed. Message names the offending location."""
