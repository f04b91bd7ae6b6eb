"""Exception hierarchy shared by all modules."""


class DiscoTrackError(Exception):
    """Base class for package errors."""


class InvalidArgumentError(DiscoTrackError, ValueError):
    pass


class OutOfDomainError(DiscoTrackError, ValueError):
    pass


class MissingDataError(DiscoTrackError, KeyError):
    pass


class UnsupportedConfigurationError(DiscoTrackError, ValueError):
    pass


class DegenerateGeometryError(DiscoTrackError, ValueError):
    pass


class EmptyRegionError(DiscoTrackError, ValueError):
    pass


class UndefinedMetricError(DiscoTrackError, ZeroDivisionError):
    pass


class ConfigError(DiscoTrackError, ValueError):
    pass


class NumericalFailureError(DiscoTrackError, RuntimeError):
    """A numerical routine failed; ``diagnostics`` carries whatever was known."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class NonConvergenceError(NumericalFailureError):
    """Iteration budget exhausted. ``last`` holds the final iterate."""

    def __init__(self, message, last=None, diagnostics=None):
        super().__init__(message, diagnostics)
        self.last = last
