"""Core signal plumbing: sampled signals, WAV I/O, FIR filtering, resampling.

Everything here is pure. Operations never mutate their inputs; sample arrays
are stored read-only so signals can be shared freely between threads.
"""

from __future__ import annotations

import math
import operator
import struct
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import firwin, kaiserord, oaconvolve, upfirdn

from .errors import (
    ConfigError,
    DegenerateInputError,
    FilterDesignError,
    FormatError,
    UnsupportedFormatError,
    UnsupportedRatioError,
)

MAX_FILTER_TAPS = 8191

# The polyphase kernel lives at the intermediate rate (input rate times the
# upsampling factor), where ratios like 160/147 legitimately need more taps
# than the public design cap allows.
_MAX_RESAMPLER_TAPS = 32767
_MAX_RESAMPLE_FACTOR = 1000
_RESAMPLER_STOPBAND_DB = 70.0
# Guard band: passband reaches 0.45x the lower of the two rates, transition
# ends exactly at that rate's Nyquist, so nothing folds back into the band.
_RESAMPLER_CUTOFF_FRACTION = 0.45

_PCM16_SCALE = 32768.0
_WAVE_FORMAT_PCM = 0x0001
_WAVE_FORMAT_IEEE_FLOAT = 0x0003
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE


def _as_int_rate(value) -> int:
    """Coerce a rate-like value (int, numpy int, integral float) to int."""
    if isinstance(value, float):
        if not value.is_integer():
            raise ValueError(f"rate must be an integer, got {value}")
        return int(value)
    return operator.index(value)


@dataclass(frozen=True, eq=False)
class SampledSignal:
    """A finite mono signal: amplitude samples plus the rate they were taken at.

    Samples are dimensionless amplitudes, nominally within [-1, 1]. The array
    is coerced to read-only float64 on construction.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        data = np.array(self.samples, dtype=np.float64)
        if data.ndim != 1:
            raise ValueError(f"expected a 1-D sample array, got shape {data.shape}")
        if data.size == 0:
            raise DegenerateInputError("signal has no samples")
        if not np.all(np.isfinite(data)):
            raise ValueError("signal contains non-finite samples")
        try:
            rate = _as_int_rate(self.sample_rate)
        except (TypeError, ValueError):
            raise ValueError(
                f"sample_rate must be a positive integer, got {self.sample_rate!r}"
            ) from None
        if rate <= 0:
            raise ValueError(f"sample_rate must be a positive integer, got {rate}")
        data.flags.writeable = False
        object.__setattr__(self, "samples", data)
        object.__setattr__(self, "sample_rate", rate)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_seconds(self) -> float:
        return self.samples.size / self.sample_rate

    def times(self) -> np.ndarray:
        """Sample instants in seconds, starting at t=0."""
        return np.arange(self.samples.size) / self.sample_rate


def rms(signal: SampledSignal) -> float:
    """Root-mean-square amplitude."""
    return float(np.sqrt(np.mean(np.square(signal.samples))))


def peak(signal: SampledSignal) -> float:
    """Largest absolute sample value."""
    return float(np.max(np.abs(signal.samples)))


@dataclass(frozen=True)
class FilterSpec:
    """Low-pass requirements: -6 dB point, transition half-width, stopband depth.

    The realized filter is flat (ripple well under 0.5 dB) below
    ``cutoff_hz - transition_width_hz`` and at least ``stopband_attenuation_db``
    down above ``cutoff_hz + transition_width_hz``.
    """

    cutoff_hz: float
    transition_width_hz: float
    stopband_attenuation_db: float

    def __post_init__(self) -> None:
        if self.cutoff_hz <= 0:
            raise ConfigError(f"cutoff_hz must be positive, got {self.cutoff_hz}")
        if self.transition_width_hz <= 0:
            raise ConfigError(
                f"transition_width_hz must be positive, got {self.transition_width_hz}"
            )
        if self.stopband_attenuation_db <= 0:
            raise ConfigError(
                f"stopband_attenuation_db must be positive, got {self.stopband_attenuation_db}"
            )


@dataclass(frozen=True, eq=False)
class FirFilter:
    """Linear-phase FIR filter: symmetric taps and their integer group delay."""

    taps: np.ndarray
    group_delay_samples: int

    def __post_init__(self) -> None:
        taps = np.array(self.taps, dtype=np.float64)
        if taps.ndim != 1 or taps.size == 0:
            raise ValueError("taps must be a non-empty 1-D array")
        if taps.size % 2 == 0:
            raise ValueError("even-length taps have a fractional group delay; use odd length")
        if np.max(np.abs(taps - taps[::-1])) > 1e-12:
            raise ValueError("taps are not symmetric; filter would not be linear-phase")
        expected_delay = (taps.size - 1) // 2
        if self.group_delay_samples != expected_delay:
            raise ValueError(
                f"group_delay_samples {self.group_delay_samples} does not match "
                f"(len(taps)-1)/2 = {expected_delay}"
            )
        taps.flags.writeable = False
        object.__setattr__(self, "taps", taps)

    def __len__(self) -> int:
        return self.taps.size


def _kaiser_taps(
    cutoff_hz: float,
    transition_width_hz: float,
    attenuation_db: float,
    sample_rate: float,
    max_taps: int,
    align_step: int = 2,
) -> np.ndarray:
    """Kaiser-windowed sinc taps, tap count rounded up so (n-1) % align_step == 0."""
    nyquist = sample_rate / 2.0
    try:
        numtaps, beta = kaiserord(attenuation_db, 2.0 * transition_width_hz / nyquist)
    except ValueError as exc:
        raise FilterDesignError(str(exc)) from exc
    remainder = (numtaps - 1) % align_step
    if remainder:
        numtaps += align_step - remainder
    if numtaps > max_taps:
        raise FilterDesignError(
            f"transition {transition_width_hz} Hz at {sample_rate} Hz needs "
            f"{numtaps} taps, over the {max_taps} cap"
        )
    return firwin(numtaps, cutoff_hz, window=("kaiser", beta), fs=sample_rate)


def design_lowpass(spec: FilterSpec, sample_rate: int) -> FirFilter:
    """Design a linear-phase low-pass FIR meeting ``spec`` at ``sample_rate``.

    Raises FilterDesignError when the band edges collide with Nyquist or the
    required tap count exceeds MAX_FILTER_TAPS.
    """
    nyquist = sample_rate / 2.0
    if spec.cutoff_hz + spec.transition_width_hz >= nyquist:
        raise FilterDesignError(
            f"stopband edge {spec.cutoff_hz + spec.transition_width_hz} Hz reaches "
            f"Nyquist ({nyquist} Hz); spec is infeasible at rate {sample_rate}"
        )
    taps = _kaiser_taps(
        spec.cutoff_hz,
        spec.transition_width_hz,
        spec.stopband_attenuation_db,
        sample_rate,
        MAX_FILTER_TAPS,
    )
    return FirFilter(taps, (taps.size - 1) // 2)


def apply_filter(fir: FirFilter, signal: SampledSignal) -> SampledSignal:
    """Filter a signal, compensating the group delay.

    The output has the same length and rate as the input and is time-aligned
    with it: the leading delay is trimmed and the tail keeps the ring-out.
    """
    full = oaconvolve(signal.samples, fir.taps)
    start = fir.group_delay_samples
    return SampledSignal(full[start : start + len(signal)], signal.sample_rate)


def resample(signal: SampledSignal, target_rate: int) -> SampledSignal:
    """Polyphase resample to ``target_rate``.

    The rate ratio must reduce to a fraction with numerator and denominator
    both at most 1000. Output duration matches the input within one sample
    and is exactly time-aligned (the kernel's group delay decimates onto the
    output grid).
    """
    try:
        target_rate = _as_int_rate(target_rate)
    except ValueError as exc:
        raise UnsupportedRatioError(str(exc)) from None
    except TypeError:
        raise ConfigError(f"target rate must be an integer, got {target_rate!r}") from None
    if target_rate <= 0:
        raise ConfigError(f"target rate must be a positive integer, got {target_rate}")
    rate = signal.sample_rate
    if target_rate == rate:
        return SampledSignal(signal.samples, rate)

    divisor = math.gcd(target_rate, rate)
    up = target_rate // divisor
    down = rate // divisor
    if up > _MAX_RESAMPLE_FACTOR or down > _MAX_RESAMPLE_FACTOR:
        raise UnsupportedRatioError(
            f"ratio {target_rate}/{rate} reduces to {up}/{down}; "
            f"factors above {_MAX_RESAMPLE_FACTOR} are not supported"
        )

    low_rate = min(rate, target_rate)
    cutoff = _RESAMPLER_CUTOFF_FRACTION * low_rate
    transition = low_rate / 2.0 - cutoff
    intermediate_rate = rate * up
    try:
        # (numtaps-1) % 2*down == 0 makes the group delay an exact multiple
        # of the decimation step, so alignment costs nothing.
        taps = _kaiser_taps(
            cutoff,
            transition,
            _RESAMPLER_STOPBAND_DB,
            intermediate_rate,
            _MAX_RESAMPLER_TAPS,
            align_step=2 * down,
        )
    except FilterDesignError as exc:
        raise UnsupportedRatioError(
            f"ratio {up}/{down} needs a longer anti-alias kernel than supported: {exc}"
        ) from exc

    full = upfirdn(taps * up, signal.samples, up, down)
    delay_out = (taps.size - 1) // (2 * down)
    n_out = round(len(signal) * up / down)
    out = full[delay_out : delay_out + n_out]
    if out.size < n_out:
        out = np.concatenate([out, np.zeros(n_out - out.size)])
    return SampledSignal(out, target_rate)


def normalize_peak(signal: SampledSignal, target_peak: float) -> SampledSignal:
    """Scale so the largest absolute sample equals ``target_peak`` (in (0, 1])."""
    if not 0.0 < target_peak <= 1.0:
        raise ConfigError(f"target_peak must be in (0, 1], got {target_peak}")
    current = peak(signal)
    if current == 0.0:
        raise DegenerateInputError("cannot normalize an all-zero signal")
    return SampledSignal(signal.samples * (target_peak / current), signal.sample_rate)


def _parse_fmt_chunk(body: bytes) -> tuple[int, int, int, int]:
    if len(body) < 16:
        raise FormatError(f"fmt chunk too short ({len(body)} bytes)")
    code, n_channels, rate, _byte_rate, _block_align, bits = struct.unpack_from(
        "<HHIIHH", body, 0
    )
    if code == _WAVE_FORMAT_EXTENSIBLE:
        # Extensible header stores the real format code in the first two
        # bytes of the SubFormat GUID at offset 24.
        if len(body) < 26:
            raise FormatError("extensible fmt chunk truncated")
        code = struct.unpack_from("<H", body, 24)[0]
    if n_channels < 1:
        raise FormatError("fmt chunk declares zero channels")
    if rate == 0:
        raise FormatError("fmt chunk declares zero sample rate")
    return code, n_channels, int(rate), bits


def read_wav(path) -> SampledSignal:
    """Read a RIFF/WAVE file into a mono SampledSignal.

    Accepts 16-bit PCM (scaled by 1/32768, so -32768 maps to -1.0 exactly)
    and 32-bit IEEE float. Multichannel files contribute channel 0 only, with
    a warning. Raises FormatError for malformed containers and
    UnsupportedFormatError for other encodings.
    """
    with open(path, "rb") as fh:
        blob = fh.read()

    if len(blob) < 12 or blob[0:4] != b"RIFF" or blob[8:12] != b"WAVE":
        raise FormatError(f"{path}: not a RIFF/WAVE file")

    fmt_body: bytes | None = None
    data_body: bytes | None = None
    pos = 12
    while pos + 8 <= len(blob):
        chunk_id = blob[pos : pos + 4]
        size = struct.unpack_from("<I", blob, pos + 4)[0]
        body = blob[pos + 8 : pos + 8 + size]
        if chunk_id == b"fmt " and fmt_body is None:
            fmt_body = body
        elif chunk_id == b"data" and data_body is None:
            data_body = body
        pos += 8 + size + (size & 1)

    if fmt_body is None:
        raise FormatError(f"{path}: missing fmt chunk")
    if data_body is None:
        raise FormatError(f"{path}: missing data chunk")

    code, n_channels, rate, bits = _parse_fmt_chunk(fmt_body)
    if code == _WAVE_FORMAT_PCM and bits == 16:
        dtype = np.dtype("<i2")
    elif code == _WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        dtype = np.dtype("<f4")
    else:
        raise UnsupportedFormatError(
            f"{path}: format code {code} at {bits} bits; only 16-bit PCM and "
            f"32-bit float are supported"
        )

    frame_bytes = n_channels * dtype.itemsize
    usable = len(data_body) - len(data_body) % frame_bytes
    if usable == 0:
        raise FormatError(f"{path}: data chunk holds no complete frames")
    raw = np.frombuffer(data_body[:usable], dtype=dtype).reshape(-1, n_channels)
    if n_channels > 1:
        warnings.warn(
            f"{path}: taking channel 0 of {n_channels}", stacklevel=2
        )
    column = raw[:, 0].astype(np.float64)
    if dtype.kind == "i":
        column /= _PCM16_SCALE
    return SampledSignal(column, rate)


def write_wav(signal: SampledSignal, path, encoding: str = "float32") -> int:
    """Write a mono WAV file; returns how many samples were clipped.

    ``encoding`` is "float32" (exact) or "pcm16" (+1.0 saturates to 32767,
    -1.0 maps to -32768; samples outside [-1, 1] are clipped and counted).
    """
    if encoding == "pcm16":
        clipped = int(np.count_nonzero(np.abs(signal.samples) > 1.0))
        codes = np.clip(
            np.rint(signal.samples * _PCM16_SCALE), -32768.0, 32767.0
        ).astype("<i2")
        payload = codes.tobytes()
        fmt_code, bits = _WAVE_FORMAT_PCM, 16
    elif encoding == "float32":
        clipped = 0
        payload = signal.samples.astype("<f4").tobytes()
        fmt_code, bits = _WAVE_FORMAT_IEEE_FLOAT, 32
    else:
        raise ConfigError(f"unknown encoding {encoding!r}; use 'pcm16' or 'float32'")

    if clipped:
        warnings.warn(f"{path}: {clipped} samples clipped to [-1, 1]", stacklevel=2)

    rate = signal.sample_rate
    block_align = bits // 8
    chunks = []
    if fmt_code == _WAVE_FORMAT_PCM:
        fmt_body = struct.pack("<HHIIHH", fmt_code, 1, rate, rate * block_align, block_align, bits)
    else:
        # Non-PCM encodings carry cbSize=0 and a fact chunk with the frame count.
        fmt_body = struct.pack(
            "<HHIIHHH", fmt_code, 1, rate, rate * block_align, block_align, bits, 0
        )
        chunks.append((b"fact", struct.pack("<I", len(signal))))
    chunks.insert(0, (b"fmt ", fmt_body))
    chunks.append((b"data", payload))

    body = bytearray()
    for chunk_id, chunk_body in chunks:
        body += chunk_id
        body += struct.pack("<I", len(chunk_body))
        body += chunk_body
        if len(chunk_body) % 2:
            body += b"\x00"

    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", 4 + len(body)) + b"WAVE")
        fh.write(bytes(body))
    return clipped
