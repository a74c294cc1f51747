"""Exception types shared across the package."""


class QhoError(Exception):
    """Base class for all package-specific errors."""


class ResonanceError(QhoError):
    """Measurement period is a half-integer multiple of the oscillator
    period; the chain variance diverges and no limiting width exists."""


class DomainError(QhoError):
    """Requested quantity is undefined for the given parameters
    (e.g. no interior optimum of the limiting width)."""


class PrecisionError(QhoError):
    """The replacement collapse cannot be realized as a weak measurement
    of the given prior (prior narrower than the instrument)."""


class InsufficientSamples(QhoError):
    """Too few samples for the requested statistic."""


class GridTooSmall(QhoError):
    """Spatial grid extent cannot contain the wave packet."""


class GridTooCoarse(QhoError):
    """Grid spacing cannot resolve the requested length scale."""


class LeakageError(QhoError):
    """Probability density reached the grid boundary."""


class ConfigError(QhoError):
    """Invalid or inconsistent run configuration."""
