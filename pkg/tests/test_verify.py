"""Spectral measurement and the envelope-correlation recovery metric."""
from __future__ import annotations

import numpy as np
import pytest

from conftest import make_speech_shaped
from ultramod.errors import ConfigError, DegenerateInputError
from ultramod.sigcore import SampledSignal, resample
from ultramod.synth import synthesize_attack
from ultramod.verify import (
    Spectrogram,
    audible_fraction,
    band_energy,
    recovery_score,
    spectral_report,
    spectrogram,
    spectrum_peaks,
)


def tone(freq: float, amp: float = 1.0, rate: int = 48000, seconds: float = 1.0) -> SampledSignal:
    t = np.arange(int(rate * seconds)) / rate
    return SampledSignal(amp * np.sin(2 * np.pi * freq * t), rate)


class TestSpectrumPeaks:
    def test_single_bin_centered_tone(self):
        peaks = spectrum_peaks(tone(5000.0))
        assert len(peaks) >= 1
        freq, amp = peaks[0]
        assert freq == pytest.approx(5000.0, abs=0.5)
        assert amp == pytest.approx(1.0, rel=0.02)

    def test_two_tones_sorted_by_amplitude(self):
        sig = SampledSignal(tone(3000.0, 0.8).samples + tone(7000.0, 0.4).samples, 48000)
        peaks = spectrum_peaks(sig)
        assert peaks[0][0] == pytest.approx(3000.0, abs=0.5)
        assert peaks[0][1] == pytest.approx(0.8, rel=0.02)
        assert peaks[1][0] == pytest.approx(7000.0, abs=0.5)
        assert peaks[1][1] == pytest.approx(0.4, rel=0.02)

    def test_half_bin_offset_interpolated(self):
        # 1000.5 Hz on a 1 Hz grid: parabolic interpolation must place the
        # peak between bins and keep the amplitude estimate close.
        peaks = spectrum_peaks(tone(1000.5, 0.7))
        freq, amp = peaks[0]
        assert freq == pytest.approx(1000.5, rel=0.02)
        assert amp == pytest.approx(0.7, rel=0.05)

    def test_min_hz_filters_low_content(self):
        sig = SampledSignal(tone(5000.0, 0.5).samples + 0.9, 48000)
        peaks = spectrum_peaks(sig, min_hz=50.0)
        assert all(freq >= 50.0 for freq, _ in peaks)
        assert peaks[0][0] == pytest.approx(5000.0, abs=0.5)

    def test_short_signal_rejected(self):
        with pytest.raises(DegenerateInputError):
            spectrum_peaks(SampledSignal(np.ones(512), 48000))


class TestBandEnergy:
    def test_full_partition_sums_to_one(self):
        rng = np.random.default_rng(3)
        sig = SampledSignal(rng.standard_normal(48000), 48000)
        fractions = band_energy(sig, [(0.0, 6000.0), (6000.0, 12000.0), (12000.0, 24000.0)])
        assert abs(sum(f for _, _, f in fractions) - 1.0) <= 1e-6

    def test_white_noise_splits_evenly(self):
        rng = np.random.default_rng(17)
        sig = SampledSignal(rng.standard_normal(96000), 48000)
        halves = band_energy(sig, [(0.0, 12000.0), (12000.0, 24000.0)])
        for _, _, frac in halves:
            assert frac == pytest.approx(0.5, abs=0.05)

    def test_shift_invariant(self):
        rng = np.random.default_rng(23)
        x = rng.standard_normal(48000)
        bands = [(0.0, 8000.0), (8000.0, 24000.0)]
        a = band_energy(SampledSignal(x, 48000), bands)
        b = band_energy(SampledSignal(np.roll(x, 1000), 48000), bands)
        for (_, _, fa), (_, _, fb) in zip(a, b):
            assert fa == pytest.approx(fb, abs=1e-9)

    def test_tone_lands_in_its_band(self):
        fractions = band_energy(tone(5000.0), [(4000.0, 6000.0)])
        assert fractions[0][2] >= 0.999

    def test_nyquist_edge_band_is_inclusive(self):
        rng = np.random.default_rng(29)
        sig = SampledSignal(rng.standard_normal(4096), 8000)
        full = band_energy(sig, [(0.0, 4000.0)])
        assert full[0][2] == pytest.approx(1.0, abs=1e-9)

    def test_band_validation(self):
        sig = tone(1000.0)
        with pytest.raises(ConfigError):
            band_energy(sig, [(5000.0, 4000.0)])
        with pytest.raises(ConfigError):
            band_energy(sig, [(0.0, 30000.0)])
        with pytest.raises(ConfigError):
            band_energy(sig, [(0.0, 8000.0), (7000.0, 12000.0)])
        with pytest.raises(ConfigError):
            band_energy(sig, [(0.0, 8000.0)], window="flat-top")

    def test_all_zero_signal_rejected(self):
        with pytest.raises(DegenerateInputError):
            band_energy(SampledSignal(np.zeros(1024), 48000), [(0.0, 8000.0)])

    def test_audible_fraction_saturates_at_low_rates(self):
        sig = SampledSignal(np.random.default_rng(1).standard_normal(8000), 16000)
        assert audible_fraction(sig) == 1.0


class TestSpectrogramOp:
    def test_stationary_tone_ridge(self):
        gram = spectrogram(tone(1000.0))
        bin_hz = gram.frequencies_hz[1] - gram.frequencies_hz[0]
        for frame in gram.values_db:
            peak_hz = gram.frequencies_hz[np.argmax(frame)]
            assert abs(peak_hz - 1000.0) <= bin_hz

    def test_chirp_ridge_rises(self):
        rate = 48000
        t = np.arange(rate) / rate
        phase = 2 * np.pi * (500.0 * t + (4000.0 - 500.0) * t**2 / 2.0)
        gram = spectrogram(SampledSignal(np.sin(phase), rate))
        ridge = gram.frequencies_hz[np.argmax(gram.values_db, axis=1)]
        assert np.all(np.diff(ridge) >= 0.0)

    def test_axes_and_shape(self):
        gram = spectrogram(tone(440.0), window_len=1024, hop=256)
        assert gram.values_db.shape == (len(gram.times_s), len(gram.frequencies_hz))
        assert gram.frequencies_hz[0] == 0.0
        assert gram.frequencies_hz[-1] == 24000.0
        assert np.all(np.diff(gram.times_s) > 0)

    def test_silence_sits_on_the_floor(self):
        gram = spectrogram(SampledSignal(np.zeros(8192), 48000))
        assert np.all(gram.values_db == -120.0)

    def test_window_validation(self):
        sig = tone(440.0)
        with pytest.raises(ConfigError):
            spectrogram(sig, window_len=1000)
        with pytest.raises(ConfigError):
            spectrogram(sig, window_len=128)
        with pytest.raises(ConfigError):
            spectrogram(sig, window_len=1024, hop=2048)

    def test_short_signal_rejected(self):
        with pytest.raises(DegenerateInputError):
            spectrogram(SampledSignal(np.ones(512), 48000), window_len=1024)


class TestRecoveryScore:
    def test_self_similarity(self, chirp_voice):
        assert recovery_score(chirp_voice, chirp_voice) == pytest.approx(1.0, abs=1e-9)

    def test_affine_invariance(self, chirp_voice):
        rate = chirp_voice.sample_rate
        warped = SampledSignal(0.3 * chirp_voice.samples + 0.05, rate)
        assert recovery_score(chirp_voice, warped) == pytest.approx(1.0, abs=1e-6)

    def test_symmetry(self, chirp_voice, noise_voice):
        assert recovery_score(chirp_voice, noise_voice) == pytest.approx(
            recovery_score(noise_voice, chirp_voice), abs=1e-12
        )

    def test_bounded(self, chirp_voice, harmonic_voice, noise_voice):
        for a, b in [(chirp_voice, harmonic_voice), (chirp_voice, noise_voice)]:
            score = recovery_score(a, b)
            assert -1.0 <= score <= 1.0

    def test_tolerates_shifts_within_the_lag_window(self, chirp_voice):
        rate = chirp_voice.sample_rate
        for ms in (10, 30, 50):
            n = int(rate * ms / 1000)
            shifted = SampledSignal(
                np.concatenate([np.zeros(n), chirp_voice.samples[:-n]]), rate
            )
            assert recovery_score(chirp_voice, shifted) >= 0.999

    def test_shift_beyond_window_decorrelates(self, chirp_voice):
        rate = chirp_voice.sample_rate
        n = int(rate * 0.080)
        shifted = SampledSignal(np.concatenate([np.zeros(n), chirp_voice.samples[:-n]]), rate)
        assert recovery_score(chirp_voice, shifted) < 0.95

    def test_cross_rate_comparison(self, chirp_voice):
        other = resample(chirp_voice, 44100)
        assert recovery_score(chirp_voice, other) >= 0.999

    def test_unrelated_signals_score_low(self, chirp_voice):
        other = make_speech_shaped(seed=99)
        assert recovery_score(chirp_voice, other) < 0.5

    def test_all_zero_inputs_rejected(self, chirp_voice):
        silent = SampledSignal(np.zeros(48000), 48000)
        with pytest.raises(DegenerateInputError):
            recovery_score(chirp_voice, silent)
        with pytest.raises(DegenerateInputError):
            recovery_score(silent, chirp_voice)


class TestSpectralReport:
    def test_structure(self, harmonic_voice):
        report = spectral_report(harmonic_voice)
        assert 1 <= len(report.tone_table) <= 10
        amps = [amp for _, amp in report.tone_table]
        assert amps == sorted(amps, reverse=True)
        assert report.tone_table[0][0] == pytest.approx(250.0, rel=0.02)
        lows, highs = report.band_energies[0], report.band_energies[1]
        assert lows[1] == 20000.0 and highs[0] == 20000.0
        assert lows[2] + highs[2] == pytest.approx(1.0, abs=1e-6)
        assert "audible_fraction" in report.metrics
        assert isinstance(report.spectrogram, Spectrogram)

    def test_attack_report_flags_inaudibility(self, chirp_voice):
        report = spectral_report(synthesize_attack(chirp_voice))
        assert report.metrics["audible_fraction"] <= 1e-4
