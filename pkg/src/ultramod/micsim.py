"""Microphone capture simulation: saturation, polynomial distortion, LPF, ADC.

The transducer-plus-amplifier front end is modeled as a memoryless power
series sum(G_i * x^i). A second-order term turns an ultrasonic AM signal
into its demodulated baseband; the 20 kHz low-pass and the ADC then keep
only that audible part.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .sigcore import (
    FilterSpec,
    SampledSignal,
    apply_filter,
    design_lowpass,
    resample,
)

LPF_STOPBAND_DB = 60.0


@dataclass(frozen=True)
class MicModel:
    """Capture-chain parameters. Defaults model a mildly non-linear 48 kHz mic."""

    gains: tuple[float, ...] = (1.0, 0.05, 0.0)
    lpf_cutoff_hz: float = 20000.0
    lpf_transition_hz: float = 2000.0
    adc_rate_hz: int = 48000
    adc_bits: int = 16
    input_clip: float = 1.0

    def __post_init__(self) -> None:
        gains = tuple(float(g) for g in self.gains)
        if not gains:
            raise ConfigError("gains must hold at least the linear coefficient")
        object.__setattr__(self, "gains", gains)
        if self.adc_rate_hz <= 0:
            raise ConfigError(f"adc_rate_hz must be positive, got {self.adc_rate_hz}")
        if self.lpf_cutoff_hz <= 0:
            raise ConfigError(f"lpf_cutoff_hz must be positive, got {self.lpf_cutoff_hz}")
        if self.lpf_transition_hz <= 0:
            raise ConfigError(
                f"lpf_transition_hz must be positive, got {self.lpf_transition_hz}"
            )
        if not 8 <= self.adc_bits <= 32:
            raise ConfigError(f"adc_bits must be within 8..32, got {self.adc_bits}")
        if self.input_clip <= 0:
            raise ConfigError(f"input_clip must be positive, got {self.input_clip}")


def _effective_order(gains: tuple[float, ...]) -> int:
    for i in range(len(gains) - 1, -1, -1):
        if gains[i] != 0.0:
            return i + 1
    return 1


def _warn_if_products_alias(signal: SampledSignal, order: int) -> None:
    if order <= 1:
        return
    spectrum = np.abs(np.fft.rfft(signal.samples))
    top = spectrum.max()
    if top == 0.0:
        return
    significant = np.nonzero(spectrum >= top * 1e-3)[0]
    f_max = significant[-1] * signal.sample_rate / len(signal)
    nyquist = signal.sample_rate / 2.0
    if order * f_max > nyquist:
        warnings.warn(
            f"order-{order} products of content near {f_max:.0f} Hz exceed Nyquist "
            f"({nyquist:.0f} Hz); they will alias",
            stacklevel=3,
        )


def nonlinearity(signal: SampledSignal, model: MicModel | None = None) -> SampledSignal:
    """Clip to the model's input bound, then apply the power series.

    For input x returns sum over i of gains[i-1] * x^i (no constant term).
    """
    model = model or MicModel()
    x = np.clip(signal.samples, -model.input_clip, model.input_clip)
    clipped = SampledSignal(x, signal.sample_rate)
    _warn_if_products_alias(clipped, _effective_order(model.gains))
    acc = np.zeros_like(x)
    for g in reversed(model.gains):
        acc = acc * x + g
    return SampledSignal(acc * x, signal.sample_rate)


def quantize_midtread(signal: SampledSignal, bits: int) -> SampledSignal:
    """Uniform midtread quantizer saturating at +/-1; zero is a level."""
    if not 8 <= bits <= 32:
        raise ConfigError(f"bits must be within 8..32, got {bits}")
    step = 2.0 ** (1 - bits)
    top = 2 ** (bits - 1) - 1
    codes = np.clip(np.rint(signal.samples / step), -(top + 1), top)
    return SampledSignal(codes * step, signal.sample_rate)


def adc_input(signal: SampledSignal, model: MicModel | None = None) -> SampledSignal:
    """Capture chain up to (not including) the quantizer.

    Distort, low-pass at the model cutoff, resample to the ADC rate.
    """
    model = model or MicModel()
    if signal.sample_rate < 2 * model.lpf_cutoff_hz:
        raise ConfigError(
            f"input rate {signal.sample_rate} Hz is below twice the LPF cutoff "
            f"{model.lpf_cutoff_hz} Hz"
        )
    distorted = nonlinearity(signal, model)
    lpf = design_lowpass(
        FilterSpec(model.lpf_cutoff_hz, model.lpf_transition_hz, LPF_STOPBAND_DB),
        signal.sample_rate,
    )
    band_limited = apply_filter(lpf, distorted)
    return resample(band_limited, model.adc_rate_hz)


def simulate(signal: SampledSignal, model: MicModel | None = None) -> SampledSignal:
    """Simulated recording: the quantized ADC output at the model's rate."""
    model = model or MicModel()
    return quantize_midtread(adc_input(signal, model), model.adc_bits)
