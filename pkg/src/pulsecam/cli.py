"""Command-line entry points.

Subcommands: analyze, evaluate, clean (annotation server), simulate, bench.
Exit codes: 0 success, 2 validation error, 3 insufficient data, 4 runtime
error. Diagnostics go to stderr as one JSON object per line. The PULSE_LOG
environment variable sets the log level.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import reports
from .annotation import AnnotationSession, import_annotations
from .beat_analysis import BeatSeries
from .errors import InsufficientDataError, PulsecamError, ValidationError
from .evaluation import evaluate_beats, window_error_rows, window_length_sweep
from .pipeline import PipelineConfig, analyze_trace, bench_trace
from .server import AnnotationService, AnnotatorServer
from .synth import MotionSpec, SynthConfig, synth_trace
from .trace_io import parse_trace, serialize_trace

logger = logging.getLogger("pulsecam")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INSUFFICIENT = 3
EXIT_RUNTIME = 4

SYNTH_PRESETS = {
    "clean-72": SynthConfig(duration_s=300, rate_hz=30, mean_hr_bpm=72),
    "clean-60": SynthConfig(duration_s=300, rate_hz=30, mean_hr_bpm=60),
    "hrv-lf": SynthConfig(duration_s=300, rate_hz=30, mean_hr_bpm=60,
                          ibi_mod_freq_hz=0.1, ibi_mod_amp_ms=50),
    "hrv-hf": SynthConfig(duration_s=300, rate_hz=30, mean_hr_bpm=60,
                          ibi_mod_freq_hz=0.3, ibi_mod_amp_ms=50),
    "motion-1.5": SynthConfig(duration_s=300, rate_hz=30, mean_hr_bpm=60,
                              motion=MotionSpec(freq_hz=1.5, amplitude=0.015)),
}


def _parse_window(label: str) -> float:
    if label in ("inf", "∞"):
        return math.inf
    try:
        value = float(label)
    except ValueError:
        raise ValidationError(f"bad window length {label!r}") from None
    if value <= 0:
        raise ValidationError("window length must be positive")
    return value


def _load_config(args) -> PipelineConfig:
    overrides = {}
    if getattr(args, "config", None):
        overrides.update(json.loads(Path(args.config).read_text()))
        if "hr_window_s" in overrides and overrides["hr_window_s"] == "inf":
            overrides["hr_window_s"] = math.inf
    if getattr(args, "hop_s", None) is not None:
        overrides["hop_s"] = args.hop_s
    if getattr(args, "hr_window", None) is not None:
        overrides["hr_window_s"] = _parse_window(args.hr_window)
    if getattr(args, "no_motion_suppression", False):
        overrides["motion_suppression"] = False
    return PipelineConfig(**overrides)


def cmd_analyze(args) -> int:
    config = _load_config(args)
    trace = parse_trace(Path(args.trace).read_bytes(), source_id=Path(args.trace).stem)
    result = analyze_trace(trace, config)
    Path(args.out).write_bytes(reports.dump_result(result))
    logger.info("wrote %s (%d beats, HR %s bpm)", args.out, len(result.beats),
                f"{result.hr_full():.2f}" if result.hr_full() else "n/a")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    doc = reports.load_result(Path(args.result).read_bytes())
    pred_beats = reports.result_beats(doc)
    truth = import_annotations(Path(args.truth).read_bytes())
    truth_beats = BeatSeries(truth.peaks, source="ground_truth")
    presets = {w: _parse_window(w) for w in args.windows.split(",")}
    report = evaluate_beats(pred_beats, truth_beats, presets,
                            blank_regions=truth.blank_regions)
    out_doc = reports.evaluation_document(report)
    if args.sweep:
        lengths = [_parse_window(w) for w in args.sweep.split(",")]
        out_doc["window_sweep"] = window_length_sweep(pred_beats, truth_beats, lengths)
    data = (json.dumps(out_doc, indent=1) + "\n").encode("utf-8")
    Path(args.out).write_bytes(data)
    if args.window_errors:
        rows = window_error_rows(pred_beats, truth_beats, presets,
                                 blank_regions=truth.blank_regions)
        lines = ["preset,center_s,pred_bpm,truth_bpm,abs_error_bpm"]
        lines += [f"{p},{c!r},{a!r},{b!r},{e!r}" for p, c, a, b, e in rows]
        Path(args.window_errors).write_text("\n".join(lines) + "\n")
    logger.info("wrote %s", args.out)
    return EXIT_OK


def cmd_clean(args) -> int:
    service = AnnotationService(store_dir=args.store)
    for signal in args.signal:
        service.add_signal(signal)
    server = AnnotatorServer(service, port=args.port, assets_dir=args.assets)
    print(f"annotator listening on http://127.0.0.1:{server.port}/ "
          f"({len(service.sessions)} session(s))", flush=True)
    server.serve_forever()
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.preset:
        if args.preset not in SYNTH_PRESETS:
            raise ValidationError(
                f"unknown preset {args.preset!r}; have {sorted(SYNTH_PRESETS)}"
            )
        config = SYNTH_PRESETS[args.preset]
        if args.seed is not None:
            config = SynthConfig(**{**config.__dict__, "seed": args.seed})
    else:
        motion = None
        if args.motion_freq is not None:
            motion = MotionSpec(args.motion_freq, args.motion_amp or 0.0)
        config = SynthConfig(
            duration_s=args.duration,
            rate_hz=args.rate,
            mean_hr_bpm=args.hr,
            ibi_mod_freq_hz=args.ibi_mod_freq or 0.0,
            ibi_mod_amp_ms=args.ibi_mod_amp or 0.0,
            pulse_amplitude=args.pulse_amplitude,
            motion=motion,
            noise_sigma=args.noise or 0.0,
            seed=args.seed or 0,
        )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    output = synth_trace(config)
    (out_dir / "trace.csv").write_bytes(serialize_trace(output.trace))
    session = AnnotationSession(
        "synth-truth",
        _truth_record_stub(output),
        peaks=output.truth_beats,
        annotator="synthetic-oracle",
    )
    (out_dir / "truth.annotations.json").write_bytes(
        session.export_annotations(created_at="1970-01-01T00:00:00Z")
    )
    logger.info("wrote %s and truth annotations (%d beats)", out_dir / "trace.csv",
                len(output.truth_beats))
    return EXIT_OK


def _truth_record_stub(output):
    """Minimal waveform record so a synthetic truth can ride the annotation format."""
    from .trace_io import GroundTruthRecord, UniformSignal

    beats = output.truth_beats.times
    return GroundTruthRecord(UniformSignal(float(beats[0]), 1.0, np.zeros(2)), "ppg")


def cmd_bench(args) -> int:
    if args.trace:
        trace = parse_trace(Path(args.trace).read_bytes())
    else:
        preset = args.synth_preset or "clean-72"
        if preset not in SYNTH_PRESETS:
            raise ValidationError(f"unknown preset {preset!r}")
        trace = synth_trace(SYNTH_PRESETS[preset]).trace
    report = bench_trace(trace, PipelineConfig(), repeats=args.repeats)
    text = json.dumps(report, indent=1)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pulsecam")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="run the pulse pipeline over a trace CSV")
    p.add_argument("--trace", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--hop-s", type=float, default=None)
    p.add_argument("--hr-window", default=None, help="15|30|16|inf or seconds")
    p.add_argument("--no-motion-suppression", action="store_true")
    p.add_argument("--config", default=None, help="JSON config overrides")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("evaluate", help="score a result against cleaned annotations")
    p.add_argument("--result", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--windows", default="15,30,inf")
    p.add_argument("--sweep", default=None, help="optional window sweep, e.g. 2,4,8,16,32,inf")
    p.add_argument("--window-errors", default=None,
                   help="also write a per-window error CSV for plotting")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("clean", help="serve the ground-truth peak cleaning tool")
    p.add_argument("--signal", nargs="+", required=True)
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--store", required=True)
    p.add_argument("--assets", default=None)
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("simulate", help="write a synthetic trace plus its truth")
    p.add_argument("--preset", default=None)
    p.add_argument("--hr", type=float, default=60.0)
    p.add_argument("--rate", type=float, default=30.0)
    p.add_argument("--duration", type=float, default=300.0)
    p.add_argument("--ibi-mod-freq", type=float, default=None)
    p.add_argument("--ibi-mod-amp", type=float, default=None)
    p.add_argument("--motion-freq", type=float, default=None)
    p.add_argument("--motion-amp", type=float, default=None)
    p.add_argument("--pulse-amplitude", type=float, default=0.005)
    p.add_argument("--noise", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="per-stage pipeline timing report")
    p.add_argument("--trace", default=None)
    p.add_argument("--synth-preset", default=None)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bench)
    return parser


def _setup_logging():
    level = os.environ.get("PULSE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _emit_error(kind: str, err: Exception):
    doc = {"error": kind, "message": str(err)}
    stage = getattr(err, "stage", None)
    if stage:
        doc["stage"] = stage
    print(json.dumps(doc), file=sys.stderr)


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InsufficientDataError as e:
        _emit_error("insufficient_data", e)
        return EXIT_INSUFFICIENT
    except ValidationError as e:
        _emit_error("validation", e)
        return EXIT_VALIDATION
    except PulsecamError as e:
        _emit_error("runtime", e)
        return EXIT_RUNTIME
    except OSError as e:
        _emit_error("io", e)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
