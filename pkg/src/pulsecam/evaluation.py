"""Score predicted beats against cleaned ground-truth beats.

Both sides of every comparison run through the identical IBI -> HR/HRV code
path, so a method evaluated against its own output scores exactly zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beat_analysis import BeatSeries, HrSeries, IbiSeries, filter_ibis, heart_rate, ibis_from_beats
from .errors import InsufficientDataError, ValidationError
from .hrv_metrics import HrvReport, hrv_report
from .trace_io import GroundTruthRecord

BASELINE_BPM = 75.0

WINDOW_PRESETS = {"15": 15.0, "30": 30.0, "16": 16.0, "inf": math.inf}


@dataclass(frozen=True)
class MaeStat:
    mae: float
    std: float  # std of the absolute errors
    n: int


@dataclass(frozen=True)
class EvaluationReport:
    hr_mae_bpm: dict  # preset label -> MaeStat
    hrv_mae: dict  # metric name -> absolute error or None
    coverage: dict  # preset label -> fraction of truth windows predicted
    baseline_mae_bpm: dict  # preset label -> MaeStat for the 75 bpm baseline


@dataclass(frozen=True)
class DeviationReport:
    hr_mae_bpm: MaeStat
    rmssd_mae_ms: float | None


def drop_blanked_ibis(ibis: IbiSeries, blank_regions) -> IbiSeries:
    """Remove intervals overlapping any blank region (kept out of statistics)."""
    if not blank_regions:
        return ibis
    keep = np.ones(len(ibis), dtype=bool)
    ends = ibis.end_times
    for t0, t1 in blank_regions:
        keep &= ~((ibis.start_times < t1) & (ends > t0))
    return IbiSeries(
        ibis.durations_ms[keep],
        ibis.start_indices[keep],
        ibis.start_times[keep],
        tuple(f for f, k in zip(ibis.flags, keep) if k),
    )


def gt_reference(
    beats: BeatSeries,
    window_s: float = math.inf,
    stride_s: float = 1.0,
    blank_regions=None,
) -> tuple[HrSeries, HrvReport]:
    """Ground-truth HR/HRV through the very same code path as predictions."""
    if len(beats) < 2:
        raise InsufficientDataError("need at least 2 beats")
    ibis = filter_ibis(drop_blanked_ibis(ibis_from_beats(beats), blank_regions))
    return heart_rate(ibis, window_s, stride_s), hrv_report(ibis, beats)


def hr_mae(pred: HrSeries, truth: HrSeries) -> tuple[MaeStat, float]:
    """MAE over windows where both series have an entry.

    Returns the stat plus coverage: the fraction of truth windows that had a
    prediction. Missing windows lower coverage, they are not scored.
    """
    if len(truth) == 0:
        raise ValidationError("empty truth series")
    pred_by_center = {e.window_center: e.bpm for e in pred.entries}
    if len(truth) == 1 and len(pred) == 1 and math.isinf(truth.entries[0].window_s):
        # whole-recording entries: centers differ, compare directly
        errors = [abs(pred.entries[0].bpm - truth.entries[0].bpm)]
    else:
        errors = [
            abs(pred_by_center[e.window_center] - e.bpm)
            for e in truth.entries
            if e.window_center in pred_by_center
        ]
    if not errors:
        raise ValidationError("no overlapping windows between prediction and truth")
    arr = np.array(errors)
    return MaeStat(float(np.mean(arr)), float(np.std(arr)), len(arr)), len(arr) / len(truth)


def baseline_hr(truth: HrSeries) -> HrSeries:
    """Blind baseline: 75 bpm at every truth grid point."""
    from .beat_analysis import HrEntry

    return HrSeries(tuple(
        HrEntry(e.window_center, BASELINE_BPM, e.window_s) for e in truth.entries
    ))


def hrv_mae(pred: HrvReport, truth: HrvReport) -> dict:
    """Per-metric absolute error; None when either side is undefined."""
    out = {}
    for name in ("rmssd_ms", "sdnn_ms", "lf_nu", "hf_nu", "lf_hf"):
        p, t = getattr(pred, name), getattr(truth, name)
        out[name] = None if p is None or t is None else abs(p - t)
    return out


def evaluate_beats(
    pred_beats: BeatSeries,
    truth_beats: BeatSeries,
    presets: dict[str, float] = WINDOW_PRESETS,
    stride_s: float = 1.0,
    blank_regions=None,
) -> EvaluationReport:
    """Full evaluation report for one recording."""
    overlap_lo = max(pred_beats.times[0], truth_beats.times[0])
    overlap_hi = min(pred_beats.times[-1], truth_beats.times[-1])
    if overlap_hi <= overlap_lo:
        raise ValidationError("prediction and truth spans do not overlap")
    pred_ibis = filter_ibis(ibis_from_beats(pred_beats))
    hr_stats, coverages, baseline_stats = {}, {}, {}
    for label, window_s in presets.items():
        truth_hr, _ = gt_reference(truth_beats, window_s, stride_s, blank_regions)
        pred_hr = heart_rate(pred_ibis, window_s, stride_s)
        stat, coverage = hr_mae(pred_hr, truth_hr)
        hr_stats[label] = stat
        coverages[label] = coverage
        baseline_stats[label] = hr_mae(baseline_hr(truth_hr), truth_hr)[0]
    _, truth_hrv = gt_reference(truth_beats, math.inf, stride_s, blank_regions)
    pred_hrv = hrv_report(pred_ibis, pred_beats)
    return EvaluationReport(hr_stats, hrv_mae(pred_hrv, truth_hrv), coverages, baseline_stats)


def window_length_sweep(
    pred_beats: BeatSeries,
    truth_beats: BeatSeries,
    lengths: list[float],
    stride_s: float = 1.0,
) -> list[dict]:
    """MAE per window length, as a ratio to the infinite-window MAE.

    0/0 is reported as ratio 1.0 flagged exact; a nonzero MAE over a zero
    infinite-window MAE is flagged undefined rather than infinite.
    """
    if len(lengths) < 2 or not any(math.isinf(x) for x in lengths):
        raise ValidationError("need at least 2 lengths including inf")
    pred_ibis = filter_ibis(ibis_from_beats(pred_beats))
    maes = {}
    for length in lengths:
        truth_hr, _ = gt_reference(truth_beats, length, stride_s)
        stat, _ = hr_mae(heart_rate(pred_ibis, length, stride_s), truth_hr)
        maes[length] = stat.mae
    inf_mae = next(maes[x] for x in lengths if math.isinf(x))
    curve = []
    for length in lengths:
        mae = maes[length]
        if inf_mae == 0.0:
            exact = mae == 0.0
            curve.append({
                "window_s": length,
                "mae_bpm": mae,
                "ratio": 1.0 if exact else None,
                "flag": "exact" if exact else "undefined",
            })
        else:
            curve.append({"window_s": length, "mae_bpm": mae,
                          "ratio": mae / inf_mae, "flag": "ok"})
    return curve


def window_error_rows(
    pred_beats: BeatSeries,
    truth_beats: BeatSeries,
    presets: dict[str, float],
    stride_s: float = 1.0,
    blank_regions=None,
) -> list[tuple]:
    """Per-window (preset, center, pred, truth, abs error) rows for plotting."""
    pred_ibis = filter_ibis(ibis_from_beats(pred_beats))
    rows = []
    for label, window_s in presets.items():
        truth_hr, _ = gt_reference(truth_beats, window_s, stride_s, blank_regions)
        pred_by_center = {
            e.window_center: e.bpm
            for e in heart_rate(pred_ibis, window_s, stride_s).entries
        }
        for e in truth_hr.entries:
            if math.isinf(window_s) and len(pred_by_center) == 1:
                pred = next(iter(pred_by_center.values()))
            else:
                pred = pred_by_center.get(e.window_center)
            if pred is not None:
                rows.append((label, e.window_center, pred, e.bpm, abs(pred - e.bpm)))
    return rows


def raw_vs_clean_deviation(
    raw: GroundTruthRecord,
    cleaned: BeatSeries,
    window_s: float = 16.0,
    stride_s: float = 1.0,
) -> DeviationReport:
    """How much the raw-detector peaks disagree with hand-cleaned peaks."""
    from .annotation import propose_peaks

    raw_beats = propose_peaks(raw)
    if len(cleaned) and len(raw_beats):
        lo, hi = raw.waveform.t0, raw.waveform.t0 + raw.waveform.duration
        if cleaned.times[0] < lo - 1e-9 or cleaned.times[-1] > hi + 1e-9:
            raise ValidationError("cleaned beats extend beyond the raw waveform span")
    raw_hr, raw_hrv = gt_reference(raw_beats, window_s, stride_s)
    clean_hr, clean_hrv = gt_reference(cleaned, window_s, stride_s)
    stat, _ = hr_mae(raw_hr, clean_hr)
    r = hrv_mae(raw_hrv, clean_hrv)
    return DeviationReport(stat, r["rmssd_ms"])
