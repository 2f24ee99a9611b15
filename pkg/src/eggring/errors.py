"""Exception hierarchy shared by every module of the package."""


class MetricsError(Exception):
    """Base class for all package errors."""


class DomainError(MetricsError, ValueError):
    """A point or parameter lies outside its admissible range."""


class DegenerateDirectionError(MetricsError, ValueError):
    pass


class PoleError(MetricsError, ZeroDivisionError):
    pass


class NotApplicableError(MetricsError):
    """A closed form was requested where its hypothesis does not hold."""


class InvalidWitnessError(MetricsError, ValueError):
    pass


class ConstructionError(MetricsError):
    pass


class SamplingError(MetricsError):
    pass


class OptimizationError(MetricsError):
    pass


class FitError(MetricsError, ValueError):
    pass


class ConfigError(MetricsError, ValueError):
    pass
