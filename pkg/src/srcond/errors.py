"""Exception types shared across the library."""


class SrcondError(Exception):
    """Base class for all library errors."""


class ConfigError(SrcondError):
    """Unsupported or inconsistent configuration (bad order, bad sweep config)."""


class DomainError(SrcondError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class NumericsError(SrcondError):
    """A numerical procedure failed to reach its accuracy target."""


class InfeasibleError(SrcondError):
    """A generator cannot produce a point set with the requested parameters."""


class SingularityError(NumericsError):
    """A matrix is too close to singular for the requested operation."""

    def __init__(self, message, lambda_min=None):
        super().__init__(message)
        self.lambda_min = lambda_min


class TruncationError(NumericsError):
    """A truncated lattice sum cannot meet its error target."""

    def __init__(self, message, estimate=None, budget=None):
        super().__init__(message)
        self.estimate = estimate
        self.budget = budget

