"""Spectral verification: tone tables, band energies, spectrograms, recovery score.

The recovery score is the headline metric: a lag-tolerant correlation of
mel-band log-energy envelopes, insensitive to gain and DC offsets, scored
in [-1, 1] with 1.0 meaning the recording carries the reference content.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.signal import find_peaks, get_window

from .errors import ConfigError, DegenerateInputError
from .sigcore import SampledSignal, resample

DB_FLOOR = -120.0
AUDIBLE_LIMIT_HZ = 20000.0
# Real microphone front ends are AC-coupled; analysis ignores content below this.
DC_GUARD_HZ = 50.0

MEL_BANDS = 40
ENVELOPE_WINDOW_S = 0.025
ENVELOPE_HOP_S = 0.010
ENVELOPE_LOW_HZ = 50.0
ENVELOPE_HIGH_HZ = 8000.0
# Band energies more than this far below the signal's loudest band count as
# silence; relative (not absolute), so scaling a signal cannot change its
# envelope shape.
ENVELOPE_FLOOR_DB = -20.0
MAX_LAG_S = 0.050

_MIN_PEAK_SAMPLES = 1024


@dataclass(frozen=True, eq=False)
class Spectrogram:
    """Short-time magnitude in dB: frames along axis 0, frequency bins along axis 1."""

    values_db: np.ndarray
    times_s: np.ndarray
    frequencies_hz: np.ndarray


@dataclass(frozen=True, eq=False)
class SpectralReport:
    """Bundle of the per-signal analysis products the report path emits."""

    tone_table: list[tuple[float, float]]
    band_energies: list[tuple[float, float, float]]
    spectrogram: Spectrogram
    metrics: dict[str, float] = field(default_factory=dict)


def _hann(n: int) -> np.ndarray:
    return get_window("hann", n, fftbins=True)


def spectrum_peaks(
    signal: SampledSignal,
    min_prominence_db: float = 20.0,
    min_hz: float = 0.0,
) -> list[tuple[float, float]]:
    """Prominent tones as (frequency_hz, amplitude), strongest first.

    Hann-windowed full-length FFT, amplitude-corrected for the window's
    coherent gain, with 3-point parabolic interpolation in dB for tones that
    fall between bins. Needs at least 1024 samples.
    """
    n = len(signal)
    if n < _MIN_PEAK_SAMPLES:
        raise DegenerateInputError(
            f"need at least {_MIN_PEAK_SAMPLES} samples for peak analysis, got {n}"
        )
    window = _hann(n)
    spectrum = np.fft.rfft(signal.samples * window)
    # window.sum() == n/2 for periodic Hann, so this is amplitude in input units
    magnitude = np.abs(spectrum) * (2.0 / window.sum())
    level_db = 20.0 * np.log10(np.maximum(magnitude, 1e-6))

    indices, _ = find_peaks(level_db, prominence=min_prominence_db)
    bin_hz = signal.sample_rate / n
    table = []
    for k in indices:
        alpha, beta, gamma = level_db[k - 1], level_db[k], level_db[k + 1]
        denom = alpha - 2.0 * beta + gamma
        delta = 0.5 * (alpha - gamma) / denom if denom != 0.0 else 0.0
        freq = (k + delta) * bin_hz
        amp = 10.0 ** ((beta - 0.25 * (alpha - gamma) * delta) / 20.0)
        if freq >= min_hz:
            table.append((float(freq), float(amp)))
    table.sort(key=lambda row: row[1], reverse=True)
    return table


def band_energy(
    signal: SampledSignal,
    bands: list[tuple[float, float]],
    window: str = "rect",
) -> list[tuple[float, float, float]]:
    """Energy fraction per band as (low_hz, high_hz, fraction).

    Bands must be non-overlapping and lie within [0, Nyquist]; fractions are
    of the total spectral energy, so a full partition sums to 1. Bands are
    half-open [low, high) except that high == Nyquist is inclusive.
    """
    nyquist = signal.sample_rate / 2.0
    for low, high in bands:
        if not (0.0 <= low < high <= nyquist):
            raise ConfigError(f"band ({low}, {high}) outside [0, {nyquist}] or empty")
    ordered = sorted(bands)
    for (_, prev_high), (next_low, _) in zip(ordered, ordered[1:]):
        if next_low < prev_high:
            raise ConfigError(f"bands overlap at {next_low} Hz")

    if window == "rect":
        win = np.ones(len(signal))
    elif window == "hann":
        win = _hann(len(signal))
    else:
        raise ConfigError(f"unknown window {window!r}; use 'rect' or 'hann'")

    power = np.abs(np.fft.rfft(signal.samples * win)) ** 2
    total = power.sum()
    if total == 0.0:
        raise DegenerateInputError("all-zero signal has no energy to apportion")
    freqs = np.fft.rfftfreq(len(signal), 1.0 / signal.sample_rate)
    out = []
    for low, high in bands:
        mask = (freqs >= low) & (freqs < high)
        if high == nyquist:
            mask |= freqs == nyquist
        out.append((float(low), float(high), float(power[mask].sum() / total)))
    return out


def audible_fraction(signal: SampledSignal, limit_hz: float = AUDIBLE_LIMIT_HZ) -> float:
    """Fraction of energy below ``limit_hz``, Hann-windowed against leakage."""
    nyquist = signal.sample_rate / 2.0
    if limit_hz >= nyquist:
        return 1.0
    return band_energy(signal, [(0.0, limit_hz)], window="hann")[0][2]


def spectrogram(signal: SampledSignal, window_len: int = 1024, hop: int = 512) -> Spectrogram:
    """Hann STFT magnitude in dB, clamped at the -120 dB floor.

    ``window_len`` must be a power of two, at least 256; ``hop`` at most
    ``window_len``. Only complete frames are taken.
    """
    if window_len < 256 or window_len & (window_len - 1):
        raise ConfigError(f"window_len must be a power of two >= 256, got {window_len}")
    if not 1 <= hop <= window_len:
        raise ConfigError(f"hop must be within 1..window_len, got {hop}")
    n = len(signal)
    if n < window_len:
        raise DegenerateInputError(
            f"signal of {n} samples is shorter than the {window_len}-sample window"
        )
    n_frames = 1 + (n - window_len) // hop
    frames = np.lib.stride_tricks.sliding_window_view(signal.samples, window_len)[::hop]
    frames = frames[:n_frames]
    window = _hann(window_len)
    magnitude = np.abs(np.fft.rfft(frames * window, axis=1)) * (2.0 / window.sum())
    values_db = 20.0 * np.log10(np.maximum(magnitude, 10.0 ** (DB_FLOOR / 20.0)))
    times = (np.arange(n_frames) * hop + window_len / 2.0) / signal.sample_rate
    freqs = np.fft.rfftfreq(window_len, 1.0 / signal.sample_rate)
    return Spectrogram(values_db, times, freqs)


def _mel(freq_hz):
    return 2595.0 * np.log10(1.0 + np.asarray(freq_hz) / 700.0)


def _mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel) / 2595.0) - 1.0)


@lru_cache(maxsize=8)
def _mel_filterbank(n_bins: int, bin_hz: float, low_hz: float, high_hz: float) -> np.ndarray:
    """Triangular filters (MEL_BANDS x n_bins) over [low_hz, high_hz]."""
    edges = _mel_to_hz(np.linspace(_mel(low_hz), _mel(high_hz), MEL_BANDS + 2))
    freqs = np.arange(n_bins) * bin_hz
    bank = np.zeros((MEL_BANDS, n_bins))
    for b in range(MEL_BANDS):
        left, center, right = edges[b], edges[b + 1], edges[b + 2]
        rising = (freqs - left) / (center - left)
        falling = (right - freqs) / (right - center)
        bank[b] = np.clip(np.minimum(rising, falling), 0.0, None)
    bank.flags.writeable = False  # cached and shared
    return bank


def _envelope(samples: np.ndarray, rate: int) -> np.ndarray:
    """Mel-band log-energy sequence, one row per hop."""
    window_len = int(round(ENVELOPE_WINDOW_S * rate))
    hop = int(round(ENVELOPE_HOP_S * rate))
    if samples.size < window_len:
        samples = np.concatenate([samples, np.zeros(window_len - samples.size)])
    n_frames = 1 + (samples.size - window_len) // hop
    frames = np.lib.stride_tricks.sliding_window_view(samples, window_len)[::hop][:n_frames]
    window = _hann(window_len)
    power = np.abs(np.fft.rfft(frames * window, axis=1)) ** 2
    high = min(ENVELOPE_HIGH_HZ, rate / 2.0)
    bank = _mel_filterbank(power.shape[1], rate / window_len, ENVELOPE_LOW_HZ, high)
    bands = power @ bank.T
    # Relative floor: clamp ENVELOPE_FLOOR_DB below the loudest band so that
    # near-silent cells do not dominate the correlation.  The absolute term
    # only guards signals with no in-band energy at all (e.g. pure DC).
    floor = max(bands.max() * 10.0 ** (ENVELOPE_FLOOR_DB / 10.0), 1e-30)
    return np.log10(np.maximum(bands, floor))


def _pearson(a: np.ndarray, b: np.ndarray) -> float | None:
    x = a.ravel() - a.mean()
    y = b.ravel() - b.mean()
    denom = np.sqrt((x @ x) * (y @ y))
    if denom == 0.0:
        return None
    return float((x @ y) / denom)


def recovery_score(original: SampledSignal, recovered: SampledSignal) -> float:
    """Envelope similarity between a reference and a recovered recording.

    Both signals are taken to the lower of the two rates, reduced to
    mel-band log-energy envelopes (50 Hz - 8 kHz), and correlated at every
    envelope lag within +/-50 ms; the best correlation is returned, clipped
    to [-1, 1]. Invariant to gain and DC offset. All-zero input raises
    DegenerateInputError.
    """
    for name, sig in (("original", original), ("recovered", recovered)):
        if not np.any(sig.samples):
            raise DegenerateInputError(f"{name} signal is all zeros")
    rate = min(original.sample_rate, recovered.sample_rate)
    if original.sample_rate != rate:
        original = resample(original, rate)
    if recovered.sample_rate != rate:
        recovered = resample(recovered, rate)

    env_a = _envelope(original.samples, rate)
    env_b = _envelope(recovered.samples, rate)
    max_lag = int(round(MAX_LAG_S / ENVELOPE_HOP_S))
    max_lag = min(max_lag, len(env_a) - 1, len(env_b) - 1)

    best = None
    for lag in range(-max_lag, max_lag + 1):
        if lag >= 0:
            a, b = env_a[lag:], env_b
        else:
            a, b = env_a, env_b[-lag:]
        n = min(len(a), len(b))
        score = _pearson(a[:n], b[:n])
        if score is not None and (best is None or score > best):
            best = score
    if best is None:
        return 0.0
    return float(np.clip(best, -1.0, 1.0))


def spectral_report(
    signal: SampledSignal,
    window_len: int = 1024,
    hop: int = 512,
    min_prominence_db: float = 20.0,
) -> SpectralReport:
    """Standard per-signal analysis bundle used by the report path."""
    nyquist = signal.sample_rate / 2.0
    if AUDIBLE_LIMIT_HZ < nyquist:
        bands = [(0.0, AUDIBLE_LIMIT_HZ), (AUDIBLE_LIMIT_HZ, nyquist)]
    else:
        bands = [(0.0, nyquist)]
    return SpectralReport(
        tone_table=spectrum_peaks(signal, min_prominence_db, min_hz=DC_GUARD_HZ)[:10],
        band_energies=band_energy(signal, bands, window="hann"),
        spectrogram=spectrogram(signal, window_len, hop),
        metrics={"audible_fraction": audible_fraction(signal)},
    )
