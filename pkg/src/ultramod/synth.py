"""Attack-signal synthesis: band-limit, upsample, modulate, ride on a carrier.

The pipeline turns a baseband voice recording into an ultrasonic signal whose
amplitude envelope carries the voice. Any receiver with a square-law term
shifts the envelope back down to audio frequencies; everything radiated stays
above 20 kHz.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateInputError
from .sigcore import (
    FilterSpec,
    SampledSignal,
    apply_filter,
    design_lowpass,
    normalize_peak,
    resample,
)

AUDIBLE_LIMIT_HZ = 20000.0
BASEBAND_STOPBAND_DB = 60.0
MIN_VOICE_SECONDS = 0.032


@dataclass(frozen=True)
class AttackConfig:
    """Synthesis knobs. Defaults give a 30 kHz carrier at 192 kHz output.

    The carrier must sit far enough above the baseband that the lower
    sideband stays ultrasonic (carrier - cutoff >= 20 kHz) and low enough
    that the upper sideband, transition included, stays within the 0.45x
    rate headroom every resampling stage preserves.
    """

    baseband_cutoff_hz: float = 8000.0
    output_rate_hz: int = 192000
    carrier_hz: float = 30000.0
    modulation_depth: float = 1.0
    output_peak: float = 0.9
    transition_width_hz: float = 1000.0
    fade_ms: float = 10.0

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if self.output_rate_hz <= 0:
            raise ConfigError(f"output_rate_hz must be positive, got {self.output_rate_hz}")
        if self.baseband_cutoff_hz <= 0:
            raise ConfigError(
                f"baseband_cutoff_hz must be positive, got {self.baseband_cutoff_hz}"
            )
        if self.transition_width_hz <= 0:
            raise ConfigError(
                f"transition_width_hz must be positive, got {self.transition_width_hz}"
            )
        if not 0.0 < self.modulation_depth <= 1.0:
            raise ConfigError(
                f"modulation_depth must be in (0, 1], got {self.modulation_depth}"
            )
        if not 0.0 < self.output_peak <= 1.0:
            raise ConfigError(f"output_peak must be in (0, 1], got {self.output_peak}")
        if self.fade_ms < 0:
            raise ConfigError(f"fade_ms must be non-negative, got {self.fade_ms}")
        if self.carrier_hz - self.baseband_cutoff_hz < AUDIBLE_LIMIT_HZ:
            raise ConfigError(
                f"carrier {self.carrier_hz} Hz puts the lower sideband below "
                f"{AUDIBLE_LIMIT_HZ:.0f} Hz: need carrier - cutoff >= {AUDIBLE_LIMIT_HZ:.0f}"
            )
        # 0.45x rate, not rate/2: resampling stages only preserve content in
        # their guard band, so a sideband parked right under Nyquist would be
        # mangled even though it is technically representable.
        headroom = 0.45 * self.output_rate_hz
        top = self.carrier_hz + self.baseband_cutoff_hz + self.transition_width_hz
        if top > headroom:
            raise ConfigError(
                f"upper sideband reaches {top:.0f} Hz, past the {headroom:.0f} Hz "
                f"headroom at rate {self.output_rate_hz}; lower the carrier or "
                f"raise the rate"
            )


def _carrier_wave(n_samples: int, sample_rate: int, carrier_hz: float) -> np.ndarray:
    # Phase zero at sample zero; am_modulate and add_carrier stay phase-aligned.
    t = np.arange(n_samples) / sample_rate
    return np.cos(2.0 * np.pi * carrier_hz * t)


def baseband_prepare(voice: SampledSignal, config: AttackConfig | None = None) -> SampledSignal:
    """Band-limit the voice to the configured cutoff and raise it to the output rate."""
    config = config or AttackConfig()
    if voice.duration_seconds < MIN_VOICE_SECONDS:
        raise DegenerateInputError(
            f"voice of {voice.duration_seconds * 1000:.1f} ms is shorter than the "
            f"{MIN_VOICE_SECONDS * 1000:.0f} ms minimum"
        )
    if voice.sample_rate < 2 * config.baseband_cutoff_hz:
        raise ConfigError(
            f"voice rate {voice.sample_rate} Hz cannot represent the "
            f"{config.baseband_cutoff_hz} Hz baseband"
        )
    lpf = design_lowpass(
        FilterSpec(config.baseband_cutoff_hz, config.transition_width_hz, BASEBAND_STOPBAND_DB),
        voice.sample_rate,
    )
    limited = apply_filter(lpf, voice)
    return resample(limited, config.output_rate_hz)


def am_modulate(s_up: SampledSignal, config: AttackConfig | None = None) -> SampledSignal:
    """Scale the prepared voice to the modulation depth and multiply by the carrier."""
    config = config or AttackConfig()
    if s_up.sample_rate != config.output_rate_hz:
        raise ConfigError(
            f"signal rate {s_up.sample_rate} Hz does not match configured output "
            f"rate {config.output_rate_hz} Hz"
        )
    leveled = normalize_peak(s_up, config.modulation_depth)
    carrier = _carrier_wave(len(s_up), s_up.sample_rate, config.carrier_hz)
    return SampledSignal(leveled.samples * carrier, s_up.sample_rate)


def add_carrier(s_modu: SampledSignal, config: AttackConfig | None = None) -> SampledSignal:
    """Add a unit carrier to the modulated signal and scale to the output peak.

    The result is exactly a positive scalar times (s_modu + unit carrier).
    """
    config = config or AttackConfig()
    if s_modu.sample_rate != config.output_rate_hz:
        raise ConfigError(
            f"signal rate {s_modu.sample_rate} Hz does not match configured output "
            f"rate {config.output_rate_hz} Hz"
        )
    carrier = _carrier_wave(len(s_modu), s_modu.sample_rate, config.carrier_hz)
    summed = SampledSignal(s_modu.samples + carrier, s_modu.sample_rate)
    return normalize_peak(summed, config.output_peak)


def fade_edges(signal: SampledSignal, fade_ms: float) -> SampledSignal:
    """Apply a raised-cosine ramp of ``fade_ms`` at both ends."""
    if fade_ms < 0:
        raise ConfigError(f"fade_ms must be non-negative, got {fade_ms}")
    n_fade = int(round(fade_ms / 1000.0 * signal.sample_rate))
    n_fade = min(n_fade, len(signal) // 2)
    if n_fade == 0:
        return signal
    ramp = np.sin(0.5 * np.pi * np.arange(n_fade) / n_fade) ** 2
    shaped = np.array(signal.samples)
    shaped[:n_fade] *= ramp
    shaped[-n_fade:] *= ramp[::-1]
    return SampledSignal(shaped, signal.sample_rate)


def synthesize_attack(voice: SampledSignal, config: AttackConfig | None = None) -> SampledSignal:
    """Full synthesis chain: prepare, modulate, add carrier, fade, set peak."""
    config = config or AttackConfig()
    s_up = baseband_prepare(voice, config)
    s_modu = am_modulate(s_up, config)
    attack = add_carrier(s_modu, config)
    if config.fade_ms > 0:
        attack = normalize_peak(fade_edges(attack, config.fade_ms), config.output_peak)
    return attack
