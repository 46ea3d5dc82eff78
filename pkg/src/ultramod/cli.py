"""Command-line front end: synth, micsim, verify, twotone, sweep.

Exit codes: 0 success/metric pass, 1 metric fail, 2 bad configuration,
3 I/O or file-format trouble, 4 degenerate input. Every run writes a JSON
manifest with all parameters resolved, enough to reproduce it bit-exactly.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    ConfigError,
    DegenerateInputError,
    FilterDesignError,
    FormatError,
    UnsupportedFormatError,
    UnsupportedRatioError,
)
from .micsim import MicModel, adc_input, nonlinearity, quantize_midtread
from .sigcore import SampledSignal, read_wav, rms, write_wav
from .synth import AttackConfig, synthesize_attack
from .verify import (
    DC_GUARD_HZ,
    audible_fraction,
    recovery_score,
    spectral_report,
)
from . import report as report_out

DEFAULT_SWEEP_STEPS = "0,6,12,18,24,30,36,42,48,54,60"
SWEEP_NOISE_RMS = 1e-4
SWEEP_JITTER = 0.02
TWOTONE_SECONDS = 1.0
TWOTONE_TOLERANCE = 0.02
TWOTONE_ZERO_FLOOR = 1e-6


def _parse_floats(text: str, flag: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"{flag}: {exc}") from exc
    if not values:
        raise ConfigError(f"{flag} must list at least one value")
    return values


def _with_noise(signal: SampledSignal, rms_level: float, seed: int) -> SampledSignal:
    if rms_level < 0:
        raise ConfigError(f"noise level must be non-negative, got {rms_level}")
    if rms_level == 0:
        return signal
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(len(signal)) * rms_level
    return SampledSignal(signal.samples + noise, signal.sample_rate)


def _rms_db(signal: SampledSignal) -> float:
    return 20.0 * math.log10(max(rms(signal), 1e-12))


def _write_manifest(path: Path, command: str, parameters: dict, inputs, outputs, metrics) -> None:
    doc = {
        "tool": "ultramod",
        "version": __version__,
        "command": command,
        "parameters": parameters,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "metrics": metrics,
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _manifest_path(primary_output) -> Path:
    return Path(primary_output).with_suffix(".manifest.json")


def cmd_synth(args) -> int:
    config = AttackConfig(
        baseband_cutoff_hz=args.cutoff,
        output_rate_hz=args.rate,
        carrier_hz=args.carrier,
        modulation_depth=args.depth,
        output_peak=args.peak,
        transition_width_hz=args.transition,
        fade_ms=args.fade_ms,
    )
    voice = read_wav(args.input)
    attack = synthesize_attack(voice, config)
    clipped = write_wav(attack, args.output, encoding=args.encoding)
    fraction = audible_fraction(attack)
    print(f"audible_fraction: {fraction:.6e}")
    metrics = {
        "audible_fraction": fraction,
        "output_peak": float(np.max(np.abs(attack.samples))),
        "duration_seconds": attack.duration_seconds,
        "clipped_samples": clipped,
    }
    _write_manifest(
        _manifest_path(args.output),
        "synth",
        {
            "input": str(args.input),
            "output": str(args.output),
            "carrier": args.carrier,
            "rate": args.rate,
            "cutoff": args.cutoff,
            "depth": args.depth,
            "peak": args.peak,
            "transition": args.transition,
            "fade_ms": args.fade_ms,
            "encoding": args.encoding,
        },
        [args.input],
        [args.output],
        metrics,
    )
    return 0


def cmd_micsim(args) -> int:
    gains = _parse_floats(args.gains, "--gains")
    model = MicModel(
        gains=tuple(gains),
        lpf_cutoff_hz=args.lpf,
        lpf_transition_hz=args.lpf_transition,
        adc_rate_hz=args.adc_rate,
        adc_bits=args.bits,
        input_clip=args.clip,
    )
    source = read_wav(args.input)
    noisy = _with_noise(source, args.noise, args.seed)
    before_quantizer = adc_input(noisy, model)
    recording = quantize_midtread(before_quantizer, model.adc_bits)
    clipped = write_wav(recording, args.output, encoding=args.encoding)
    quantization_rms = float(
        np.sqrt(np.mean((recording.samples - before_quantizer.samples) ** 2))
    )
    metrics = {
        "input_rms_db": _rms_db(source),
        "output_rms_db": _rms_db(recording),
        "quantization_rms": quantization_rms,
        "clipped_samples": clipped,
    }
    print(f"output_rms_db: {metrics['output_rms_db']:.2f}")
    print(f"quantization_rms: {quantization_rms:.6e}")
    _write_manifest(
        _manifest_path(args.output),
        "micsim",
        {
            "input": str(args.input),
            "output": str(args.output),
            "gains": args.gains,
            "lpf": args.lpf,
            "lpf_transition": args.lpf_transition,
            "adc_rate": args.adc_rate,
            "bits": args.bits,
            "clip": args.clip,
            "noise": args.noise,
            "seed": args.seed,
            "encoding": args.encoding,
        },
        [args.input],
        [args.output],
        metrics,
    )
    return 0


def cmd_verify(args) -> int:
    original = read_wav(args.original)
    recovered = read_wav(args.recovered)
    score = recovery_score(original, recovered)
    report_original = spectral_report(original)
    report_recovered = spectral_report(recovered)

    print(f"recovery_score: {score:.4f}")
    for label, rep in (("original", report_original), ("recovered", report_recovered)):
        print(f"audible_fraction {label}: {rep.metrics['audible_fraction']:.6e}")
        tones = ", ".join(f"{f:.1f} Hz @ {a:.4g}" for f, a in rep.tone_table[:5])
        print(f"dominant tones {label}: {tones if tones else '(none)'}")

    base = Path(args.report)
    sibling = lambda suffix: base.parent / (base.stem + suffix)
    outputs = [base]
    metrics = {
        "recovery_score": score,
        "threshold": args.threshold,
        "audible_fraction_original": report_original.metrics["audible_fraction"],
        "audible_fraction_recovered": report_recovered.metrics["audible_fraction"],
    }
    report_out.write_metrics_csv(metrics, base)
    for label, rep, signal in (
        ("original", report_original, original),
        ("recovered", report_recovered, recovered),
    ):
        spec_path = sibling(f"_{label}_spectrogram.csv")
        tone_path = sibling(f"_{label}_tones.csv")
        report_out.write_spectrogram_csv(rep.spectrogram, spec_path)
        report_out.write_tone_table_csv(
            [(f, a, None, None) for f, a in rep.tone_table], tone_path
        )
        outputs += [spec_path, tone_path]
    figure_path = sibling("_comparison.png")
    report_out.render_comparison(
        original, recovered, report_original.spectrogram, report_recovered.spectrogram,
        figure_path,
    )
    outputs.append(figure_path)

    _write_manifest(
        _manifest_path(base),
        "verify",
        {
            "original": str(args.original),
            "recovered": str(args.recovered),
            "report": str(args.report),
            "threshold": args.threshold,
        },
        [args.original, args.recovered],
        outputs,
        metrics,
    )
    return 0 if score >= args.threshold else 1


def cmd_twotone(args) -> int:
    f1, f2, rate = args.f1, args.f2, args.rate
    if f1 <= 0 or f2 <= 0:
        raise ConfigError("tone frequencies must be positive")
    if f1 == f2:
        raise ConfigError("tones must differ; equal tones collapse the product set")
    if rate <= 0:
        raise ConfigError(f"rate must be positive, got {rate}")
    targets = {
        "dc": 0,
        "2*f1": 2 * f1,
        "2*f2": 2 * f2,
        "f1+f2": f1 + f2,
        "|f1-f2|": abs(f1 - f2),
    }
    nyquist = rate / 2
    if max(targets.values()) >= nyquist:
        raise ConfigError(
            f"products reach {max(targets.values())} Hz, at or above Nyquist {nyquist:.0f} Hz"
        )
    product_set = set(targets.values())
    if len(product_set) != len(targets) or product_set & {f1, f2}:
        raise ConfigError(
            "product frequencies collide with each other or the tones "
            "(harmonically related pair); pick different frequencies"
        )

    n = int(round(rate * TWOTONE_SECONDS))
    t = np.arange(n) / rate
    tones = np.cos(2 * np.pi * f1 * t) + np.cos(2 * np.pi * f2 * t)
    model = MicModel(gains=(1.0, args.g2), input_clip=math.inf)
    distorted = nonlinearity(SampledSignal(tones, rate), model)

    spectrum = np.fft.rfft(distorted.samples)
    predicted = {
        "dc": args.g2,
        "2*f1": args.g2 / 2,
        "2*f2": args.g2 / 2,
        "f1+f2": args.g2,
        "|f1-f2|": args.g2,
    }
    rows = []
    all_pass = True
    for label, freq in targets.items():
        # one-second window puts every integer frequency on an exact bin
        measured = abs(spectrum[freq]) / n
        if freq != 0:
            measured *= 2.0
        expect = predicted[label]
        if expect != 0.0:
            rel_err = abs(measured - expect) / abs(expect)
            passed = rel_err <= TWOTONE_TOLERANCE
        else:
            rel_err = measured
            passed = measured <= TWOTONE_ZERO_FLOOR
        all_pass &= passed
        rows.append((float(freq), float(measured), float(expect), float(rel_err)))
        print(
            f"{label}: {freq} Hz predicted {expect:.6g} measured {measured:.6g} "
            f"({'ok' if passed else 'MISMATCH'})"
        )

    base = Path(args.report)
    report_out.write_tone_table_csv(rows, base)
    figure_path = base.parent / (base.stem + "_spectrum.png")
    report_out.render_twotone_spectrum(
        distorted,
        [(float(freq), predicted[label]) for label, freq in targets.items()],
        figure_path,
    )
    _write_manifest(
        _manifest_path(base),
        "twotone",
        {
            "f1": f1,
            "f2": f2,
            "g2": args.g2,
            "rate": rate,
            "report": str(args.report),
        },
        [],
        [base, figure_path],
        {f"measured_{int(freq)}hz": measured for freq, measured, _, __ in rows},
    )
    print(f"twotone: {'PASS' if all_pass else 'FAIL'}")
    return 0 if all_pass else 1


def cmd_sweep(args) -> int:
    attenuations = _parse_floats(args.attenuations_db, "--attenuations-db")
    if any(a < 0 for a in attenuations):
        raise ConfigError("attenuations must be non-negative dB values")
    voice = read_wav(args.input)
    attack = synthesize_attack(voice)
    model = MicModel()
    rows = []
    for attenuation in attenuations:
        scaled = SampledSignal(
            attack.samples * 10.0 ** (-attenuation / 20.0), attack.sample_rate
        )
        noisy = _with_noise(scaled, args.noise_rms, args.seed)
        recording = quantize_midtread(adc_input(noisy, model), model.adc_bits)
        score = recovery_score(voice, recording)
        rows.append((attenuation, score))
        print(f"attenuation {attenuation:g} dB: recovery_score {score:.4f}")

    monotone = all(
        later <= earlier + SWEEP_JITTER
        for (_, earlier), (_, later) in zip(rows, rows[1:])
    )
    base = Path(args.report)
    report_out.write_sweep_csv(rows, base)
    figure_path = base.parent / (base.stem + "_sweep.png")
    report_out.render_sweep(rows, figure_path)
    metrics = {f"score_{attenuation:g}db": score for attenuation, score in rows}
    metrics["monotone_within_jitter"] = float(monotone)
    _write_manifest(
        _manifest_path(base),
        "sweep",
        {
            "input": str(args.input),
            "report": str(args.report),
            "attenuations_db": args.attenuations_db,
            "noise_rms": args.noise_rms,
            "seed": args.seed,
        },
        [args.input],
        [base, figure_path],
        metrics,
    )
    print(f"sweep monotone within {SWEEP_JITTER}: {'yes' if monotone else 'NO'}")
    return 0 if monotone else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ultramod",
        description="Ultrasonic AM voice-injection toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize an attack signal from a voice WAV")
    p.add_argument("input", help="voice WAV (any supported rate)")
    p.add_argument("output", help="attack WAV to write")
    p.add_argument("--carrier", type=float, default=30000.0, help="carrier frequency [Hz]")
    p.add_argument("--rate", type=int, default=192000, help="output sample rate [Hz]")
    p.add_argument("--cutoff", type=float, default=8000.0, help="baseband cutoff [Hz]")
    p.add_argument("--depth", type=float, default=1.0, help="modulation depth (0, 1]")
    p.add_argument("--peak", type=float, default=0.9, help="output peak (0, 1]")
    p.add_argument("--transition", type=float, default=1000.0, help="LPF transition width [Hz]")
    p.add_argument("--fade-ms", type=float, default=10.0, help="edge fade, 0 disables [ms]")
    p.add_argument("--encoding", choices=["float32", "pcm16"], default="float32")
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("micsim", help="simulate a microphone capturing a WAV")
    p.add_argument("input", help="WAV presented to the microphone")
    p.add_argument("output", help="simulated recording WAV to write")
    p.add_argument("--gains", default="1,0.05,0", help="polynomial gains G1,G2,... (csv)")
    p.add_argument("--lpf", type=float, default=20000.0, help="front-end LPF cutoff [Hz]")
    p.add_argument("--lpf-transition", type=float, default=2000.0, help="LPF transition [Hz]")
    p.add_argument("--adc-rate", type=int, default=48000, help="ADC sample rate [Hz]")
    p.add_argument("--bits", type=int, default=16, help="ADC depth (8..32)")
    p.add_argument("--clip", type=float, default=1.0, help="input saturation bound")
    p.add_argument("--noise", type=float, default=0.0, help="white-noise RMS before distortion")
    p.add_argument("--seed", type=int, default=0, help="noise seed")
    p.add_argument("--encoding", choices=["float32", "pcm16"], default="float32")
    p.set_defaults(handler=cmd_micsim)

    p = sub.add_parser("verify", help="score a recovered recording against its reference")
    p.add_argument("original", help="reference WAV")
    p.add_argument("recovered", help="recovered/recorded WAV")
    p.add_argument("--report", required=True, help="metrics CSV; siblings get CSVs and a PNG")
    p.add_argument("--threshold", type=float, default=0.9, help="pass threshold on the score")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("twotone", help="check the distortion model against closed-form products")
    p.add_argument("--f1", type=int, required=True, help="first tone [Hz, integer]")
    p.add_argument("--f2", type=int, required=True, help="second tone [Hz, integer]")
    p.add_argument("--g2", type=float, default=0.05, help="second-order gain")
    p.add_argument("--rate", type=int, default=192000, help="sample rate [Hz]")
    p.add_argument("--report", required=True, help="tone-table CSV; sibling PNG spectrum")
    p.set_defaults(handler=cmd_twotone)

    p = sub.add_parser("sweep", help="recovery score vs attack attenuation")
    p.add_argument("input", help="voice WAV")
    p.add_argument("--report", required=True, help="sweep CSV; sibling PNG curve")
    p.add_argument("--attenuations-db", default=DEFAULT_SWEEP_STEPS, help="csv of dB steps")
    p.add_argument("--noise-rms", type=float, default=SWEEP_NOISE_RMS, help="fixed noise RMS")
    p.add_argument("--seed", type=int, default=0, help="noise seed")
    p.set_defaults(handler=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except (ConfigError, FilterDesignError, UnsupportedRatioError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DegenerateInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (FormatError, UnsupportedFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def run() -> None:
    sys.exit(main())
