"""Exception hierarchy shared across the package."""


class SciVizError(Exception):
    """Base class for all errors raised by sciviz."""


class ShapeError(SciVizError, ValueError):
    """Array shapes are incompatible with the operation."""


class NumericalError(SciVizError, FloatingPointError):
    """Non-finite values appeared where finite ones are required."""


class TrainingDivergedError(NumericalError):
    """The training loss became NaN or infinite."""


class CorruptFileError(SciVizError, IOError):
    """A file could not be decoded (truncated, bad magic, bad checksum)."""


class FingerprintMismatchError(SciVizError, ValueError):
    """A weights file was written for a different architecture."""


class ConfigError(SciVizError, ValueError):
    """Unknown config key or invalid config value."""
