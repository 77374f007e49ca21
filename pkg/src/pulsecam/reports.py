"""Stable on-disk documents for analysis results and evaluation reports.

Single JSON document per file with fixed key order, so golden-file
comparisons are byte-stable once timing fields are masked.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .beat_analysis import BeatSeries
from .errors import ValidationError
from .evaluation import EvaluationReport
from .pipeline import AnalysisResult

RESULT_SCHEMA = "pulsecam.result.v1"
EVALUATION_SCHEMA = "pulsecam.evaluation.v1"

# Keys whose values vary run to run; masked before byte comparisons.
TIMING_KEYS = ("timing_ms", "wall_s", "realtime_factor")


def _window_label(window_s: float) -> str | float:
    return "inf" if math.isinf(window_s) else window_s


def result_document(result: AnalysisResult) -> dict:
    return {
        "schema": RESULT_SCHEMA,
        "rate_hz": result.rate,
        "beats_s": [float(t) for t in result.beats.times],
        "ibis": {
            "durations_ms": [float(d) for d in result.ibis.durations_ms],
            "start_indices": [int(i) for i in result.ibis.start_indices],
            "flags": list(result.ibis.flags),
        },
        "hr_series": [
            {"center_s": e.window_center, "bpm": e.bpm, "window_s": _window_label(e.window_s)}
            for e in result.hr_series.entries
        ],
        "hr_full_bpm": result.hr_full(),
        "hrv": result.hrv.as_dict(),
        "meta": result.meta,
    }


def dump_result(result: AnalysisResult) -> bytes:
    return (json.dumps(result_document(result), indent=1) + "\n").encode("utf-8")


def load_result(data: bytes | str) -> dict:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"bad result file: {e}") from None
    if doc.get("schema") != RESULT_SCHEMA:
        raise ValidationError(f"unsupported result schema {doc.get('schema')!r}")
    return doc


def result_beats(doc: dict) -> BeatSeries:
    return BeatSeries(np.asarray(doc["beats_s"], dtype=np.float64))


def masked_result_bytes(data: bytes) -> bytes:
    """Result file with run-varying timing values replaced, for comparisons."""
    doc = json.loads(data)
    meta = doc.get("meta", {})
    for key in TIMING_KEYS:
        if key in meta:
            meta[key] = "masked"
    return (json.dumps(doc, indent=1) + "\n").encode("utf-8")


def evaluation_document(report: EvaluationReport) -> dict:
    def stats(d):
        return {
            label: {"mae_bpm": s.mae, "std_bpm": s.std, "n_windows": s.n}
            for label, s in d.items()
        }

    return {
        "schema": EVALUATION_SCHEMA,
        "hr_mae_bpm": stats(report.hr_mae_bpm),
        "baseline_mae_bpm": stats(report.baseline_mae_bpm),
        "hrv_mae": report.hrv_mae,
        "coverage": report.coverage,
    }


def dump_evaluation(report: EvaluationReport) -> bytes:
    return (json.dumps(evaluation_document(report), indent=1) + "\n").encode("utf-8")
