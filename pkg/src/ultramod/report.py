"""Report-path outputs: delimited files plus matplotlib figures next to them.

CSV layouts are fixed: tone tables are frequency_hz,amplitude,predicted,
relative_error; spectrograms carry the frequency axis in the first row and
the time axis in the first column; sweeps are attenuation_db,recovery_score.
"""

from __future__ import annotations

import csv

import numpy as np

from .sigcore import SampledSignal
from .verify import DB_FLOOR, Spectrogram


def _fmt(value) -> str:
    return f"{float(value):.10g}"


def write_metrics_csv(metrics: dict, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        for key, value in metrics.items():
            writer.writerow([key, _fmt(value)])


def write_tone_table_csv(rows, path) -> None:
    """Rows of (frequency_hz, amplitude, predicted, relative_error); the last
    two may be None for measurement-only tables."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frequency_hz", "amplitude", "predicted", "relative_error"])
        for freq, amp, predicted, rel_err in rows:
            writer.writerow(
                [
                    _fmt(freq),
                    _fmt(amp),
                    "" if predicted is None else _fmt(predicted),
                    "" if rel_err is None else _fmt(rel_err),
                ]
            )


def write_spectrogram_csv(spec: Spectrogram, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + [_fmt(f) for f in spec.frequencies_hz])
        for t, row in zip(spec.times_s, spec.values_db):
            writer.writerow([_fmt(t)] + [_fmt(v) for v in row])


def write_sweep_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["attenuation_db", "recovery_score"])
        for attenuation, score in rows:
            writer.writerow([_fmt(attenuation), _fmt(score)])


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    return plt


def _plot_spectrogram(ax, spec: Spectrogram, title: str):
    image = ax.imshow(
        spec.values_db.T,
        origin="lower",
        aspect="auto",
        extent=(spec.times_s[0], spec.times_s[-1], 0.0, spec.frequencies_hz[-1] / 1000.0),
        vmin=DB_FLOOR,
        vmax=0.0,
        cmap="magma",
    )
    ax.set_title(title)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("frequency [kHz]")
    return image


def render_comparison(
    original: SampledSignal,
    recovered: SampledSignal,
    spec_original: Spectrogram,
    spec_recovered: Spectrogram,
    path,
) -> None:
    """Two-row figure: waveform and spectrogram for reference and recording."""
    plt = _pyplot()
    fig, axes = plt.subplots(2, 2, figsize=(11.0, 6.5))
    for row, (signal, spec, label) in enumerate(
        [(original, spec_original, "reference"), (recovered, spec_recovered, "recovered")]
    ):
        stride = max(1, len(signal) // 20000)
        axes[row, 0].plot(signal.times()[::stride], signal.samples[::stride], linewidth=0.6)
        axes[row, 0].set_title(f"{label} waveform")
        axes[row, 0].set_xlabel("time [s]")
        axes[row, 0].set_ylabel("amplitude")
        image = _plot_spectrogram(axes[row, 1], spec, f"{label} spectrogram [dB]")
    fig.colorbar(image, ax=axes[:, 1], shrink=0.85)
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_sweep(rows, path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    attenuations = [a for a, _ in rows]
    scores = [s for _, s in rows]
    ax.plot(attenuations, scores, "o-")
    ax.set_xlabel("attenuation [dB]")
    ax.set_ylabel("recovery score")
    ax.set_ylim(-0.05, 1.05)
    ax.grid(True, alpha=0.4)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_twotone_spectrum(signal: SampledSignal, markers, path) -> None:
    """Full-signal spectrum with x marks at the predicted product levels."""
    plt = _pyplot()
    magnitude = np.abs(np.fft.rfft(signal.samples)) * 2.0 / len(signal)
    magnitude[0] /= 2.0
    freqs = np.fft.rfftfreq(len(signal), 1.0 / signal.sample_rate)
    level_db = 20.0 * np.log10(np.maximum(magnitude, 10.0 ** (DB_FLOOR / 20.0)))
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    ax.plot(freqs / 1000.0, level_db, linewidth=0.7)
    for freq, predicted in markers:
        if predicted > 0:
            ax.plot(freq / 1000.0, 20.0 * np.log10(predicted), "rx", markersize=9)
    ax.set_xlabel("frequency [kHz]")
    ax.set_ylabel("level [dB]")
    ax.set_ylim(DB_FLOOR, 5.0)
    ax.grid(True, alpha=0.4)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
