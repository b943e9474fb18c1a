"""Exception types shared across the simulator."""


class NfsimError(Exception):
    """Base class for all simulator errors."""


class ConfigError(NfsimError):
    """Invalid physical or run configuration."""


class GridError(NfsimError):
    """Time-grid mismatch or a delay/window incompatible with the grid."""


class AnalysisError(NfsimError):
    """Trace analysis could not produce a meaningful estimate."""
