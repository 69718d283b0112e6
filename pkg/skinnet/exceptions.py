"""
Custom exceptions for skinnet.
"""


class SkinNetError(Exception):
    """Base exception for all skinnet errors."""

    pass


class ShapeError(SkinNetError, ValueError):
    """Raised when tensor shapes or channel counts violate an operation's contract."""

    pass


class GradientError(SkinNetError):
    """Raised when reverse-mode differentiation is misused."""

    pass


class ConfigError(SkinNetError):
    """Raised when configuration is invalid."""

    pass


class DataError(SkinNetError):
    """Raised when dataset files or masks are unusable."""

    pass


class CheckpointError(SkinNetError):
    """Raised when a checkpoint cannot be read or does not match the config."""

    pass


class TrainingError(SkinNetError):
    """Raised when a training fold cannot continue."""

    pass
