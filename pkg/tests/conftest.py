"""Shared fixtures: small deterministic voice-band test signals."""
from __future__ import annotations

import numpy as np
import pytest

from ultramod.sigcore import FilterSpec, SampledSignal, apply_filter, design_lowpass, normalize_peak

RATE = 48000
SECONDS = 2.0


def measure_bin(samples: np.ndarray, rate: int, freq: float) -> float:
    """Exact-bin amplitude readout of a rectangular FFT (DC unscaled, else x2)."""
    n = len(samples)
    k = int(round(freq * n / rate))
    amp = abs(np.fft.rfft(samples)[k]) / n
    return float(amp if k == 0 else 2.0 * amp)


def make_chirp(rate: int = RATE, seconds: float = SECONDS) -> SampledSignal:
    t = np.arange(int(rate * seconds)) / rate
    f0, f1 = 300.0, 3000.0
    phase = 2.0 * np.pi * (f0 * t + (f1 - f0) * t**2 / (2.0 * seconds))
    return SampledSignal(0.8 * np.sin(phase), rate)


def make_harmonic(rate: int = RATE, seconds: float = SECONDS) -> SampledSignal:
    t = np.arange(int(rate * seconds)) / rate
    x = (
        np.sin(2 * np.pi * 250.0 * t)
        + 0.6 * np.sin(2 * np.pi * 500.0 * t)
        + 0.4 * np.sin(2 * np.pi * 1000.0 * t)
    )
    return SampledSignal(0.8 * x / np.max(np.abs(x)), rate)


def make_speech_shaped(rate: int = RATE, seconds: float = SECONDS, seed: int = 7) -> SampledSignal:
    """Band-limited noise with a slow syllable-ish amplitude contour."""
    rng = np.random.default_rng(seed)
    raw = SampledSignal(rng.standard_normal(int(rate * seconds)), rate)
    fir = design_lowpass(FilterSpec(3400.0, 600.0, 60.0), rate)
    shaped = apply_filter(fir, raw)
    t = np.arange(len(shaped)) / rate
    contour = 0.2 + 0.8 * (0.5 + 0.5 * np.sin(2 * np.pi * 3.0 * t))
    return normalize_peak(SampledSignal(shaped.samples * contour, rate), 0.8)


@pytest.fixture(scope="session")
def chirp_voice() -> SampledSignal:
    return make_chirp()


@pytest.fixture(scope="session")
def harmonic_voice() -> SampledSignal:
    return make_harmonic()


@pytest.fixture(scope="session")
def noise_voice() -> SampledSignal:
    return make_speech_shaped()
