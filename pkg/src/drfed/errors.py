"""Exception types raised across the package."""


class DrFedError(Exception):
    """Base class for all package errors."""


class SizeLimitError(DrFedError, ValueError):
    """An exact (enumeration-based) routine was asked for too many nodes."""


class CalibrationError(DrFedError, ValueError):
    """No distribution parameter reproduces the requested mean on [0, 1]."""


class PhaseError(DrFedError, RuntimeError):
    """An agent operation was invoked in the wrong algorithm phase."""


class ClockError(DrFedError, RuntimeError):
    """Round indices were supplied out of order."""


class ConfigError(DrFedError, ValueError):
    """An experiment configuration is invalid.

    ``key`` names the offending configuration entry when there is one.
    """

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key
