"""Exception types raised across the engine."""


class MyoloopError(Exception):
    """Base class for engine errors."""


class InvalidSignal(MyoloopError):
    """Raw signal contains non-finite values or has a bad shape."""


class TooFewSamples(MyoloopError):
    """Window too short for density estimation."""


class InsufficientCalibration(MyoloopError):
    """Not enough calibration windows to build or score references."""


class EmptySample(MyoloopError):
    """Distance requested between empty sample sets."""


class DimError(MyoloopError):
    """Mismatched array dimensions between banks, weights, or samples."""


class ConfigError(MyoloopError):
    """Configuration value out of its valid range."""


class NotCalibrated(MyoloopError):
    """Operation requires calibrated references that are missing."""
