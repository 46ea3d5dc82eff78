"""Exception types shared across the toolkit."""


class UltramodError(Exception):
    """Base class for all toolkit errors."""


class FormatError(UltramodError):
    """File is not a well-formed RIFF/WAVE container."""


class UnsupportedFormatError(UltramodError):
    """WAV encoding other than 16-bit PCM or 32-bit IEEE float."""


class FilterDesignError(UltramodError):
    """Requested filter cannot be realized (infeasible band edges or tap budget)."""


class UnsupportedRatioError(UltramodError):
    """Resampling ratio is not a small rational number."""


class ConfigError(UltramodError):
    """Invalid configuration value or incompatible input for the requested operation."""


class DegenerateInputError(UltramodError):
    """Input signal is empty, all-zero, or too short to process."""
