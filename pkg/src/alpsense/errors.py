"""Exception types shared by the toolkit."""


class ValidationError(ValueError):
    """Bad input or a violated invariant. ``key`` names the offending field."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class ConfigError(ValidationError):
    pass


class DomainError(ValueError):
    """Argument outside the region where a formula is defined."""


class ConvergenceError(RuntimeError):
    """Numerical routine failed to reach its tolerance."""

    def __init__(self, message, achieved=None):
        self.achieved = achieved
        super().__init__(message if achieved is None else f"{message} (achieved {achieved:.3g})")


class IntegrationError(RuntimeError):
    """Time integration went unstable."""


class NoEquilibriumError(RuntimeError):
    pass
