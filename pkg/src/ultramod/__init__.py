"""Ultrasonic AM voice-injection toolkit.

Synthesizes inaudible attack signals that carry a voice on an ultrasonic
carrier, simulates how a non-linear microphone front end demodulates them,
and verifies how much of the voice the simulated recording recovers.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateInputError,
    FilterDesignError,
    FormatError,
    UltramodError,
    UnsupportedFormatError,
    UnsupportedRatioError,
)
from .micsim import MicModel, adc_input, nonlinearity, quantize_midtread, simulate
from .sigcore import (
    FilterSpec,
    FirFilter,
    SampledSignal,
    apply_filter,
    design_lowpass,
    normalize_peak,
    peak,
    read_wav,
    resample,
    rms,
    write_wav,
)
from .synth import (
    AttackConfig,
    add_carrier,
    am_modulate,
    baseband_prepare,
    fade_edges,
    synthesize_attack,
)
from .verify import (
    SpectralReport,
    Spectrogram,
    audible_fraction,
    band_energy,
    recovery_score,
    spectral_report,
    spectrogram,
    spectrum_peaks,
)

__all__ = [
    "AttackConfig",
    "ConfigError",
    "DegenerateInputError",
    "FilterDesignError",
    "FilterSpec",
    "FirFilter",
    "FormatError",
    "MicModel",
    "SampledSignal",
    "SpectralReport",
    "Spectrogram",
    "UltramodError",
    "UnsupportedFormatError",
    "UnsupportedRatioError",
    "adc_input",
    "add_carrier",
    "am_modulate",
    "apply_filter",
    "audible_fraction",
    "band_energy",
    "baseband_prepare",
    "design_lowpass",
    "fade_edges",
    "nonlinearity",
    "normalize_peak",
    "peak",
    "quantize_midtread",
    "read_wav",
    "recovery_score",
    "resample",
    "rms",
    "simulate",
    "spectral_report",
    "spectrogram",
    "spectrum_peaks",
    "synthesize_attack",
    "write_wav",
]
