"""Exception types raised across the package."""


class RisbisError(Exception):
    """Base class for all package errors."""


class ConfigError(RisbisError, ValueError):
    """Invalid scenario or settings."""


class GeometryError(RisbisError, ValueError):
    """Observation point coincides with a unit, or similar degenerate geometry."""


class NumericError(RisbisError, ArithmeticError):
    """Non-finite input or a numerical breakdown."""


class InfeasibleError(RisbisError):
    """No initial bisection bracket exists: the suppression thresholds cannot be met.

    ``trace`` holds the bracket-search evaluations as ``(t, value, lam)`` tuples.
    """

    def __init__(self, message, trace=()):
        super().__init__(message)
        self.trace = list(trace)


class SearchSpaceError(RisbisError, ValueError):
    """Exhaustive enumeration refused because the grid is too large."""
