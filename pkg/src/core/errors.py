"""
Exception types shared by the simulator packages.
"""


class ConfigurationError(ValueError):
    """Raised when a configuration or call violates a documented constraint."""


class ResolutionError(ConfigurationError):
    """Raised when a grid resolution is incompatible with the mode set."""


class UndefinedRatioError(ValueError):
    """Raised when a ratio diagnostic is requested for a zero state."""


class DivergedStateError(RuntimeError):
    """Raised when the drift or a step produces non-finite values."""


class EnsembleError(RuntimeError):
    """Raised when an ensemble cannot be reduced (mismatched grids, all paths diverged)."""
