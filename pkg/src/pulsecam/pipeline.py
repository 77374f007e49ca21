"""End-to-end pipeline: trace -> BVP -> beats -> HR/HRV, plus the per-stage
throughput benchmark. One pipeline instance owns one stream's state.
"""

from __future__ import annotations

import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .beat_analysis import (
    DEFAULT_PEAK_DELTA,
    BeatSeries,
    HrSeries,
    IbiSeries,
    detect_peaks,
    filter_ibis,
    heart_rate,
    ibis_from_beats,
)
from .errors import InsufficientDataError, NoSignalError, PulsecamError, ValidationError
from .hrv_metrics import HrvReport, hrv_report
from .pulse_extraction import WINDOW_SAMPLES, RgbWindow, pos_project
from .spectral_filtering import (
    NARROW_BANDWIDTH_HZ,
    BandLimits,
    BvpAccumulator,
    band_limit,
    dominant_frequency,
    forward_spectrum,
    narrowband_filter,
    suppress_motion,
)
from .trace_io import (
    POSE_CHANNELS,
    SampleTrace,
    UniformSignal,
    choose_pipeline_rate,
    resample_uniform,
)

@dataclass(frozen=True)
class PipelineConfig:
    window_s: float = 8.53
    hop_s: float = 0.5
    band: tuple[float, float] = (0.7, 4.0)
    narrow_bw_hz: float = NARROW_BANDWIDTH_HZ
    peak_delta: float = DEFAULT_PEAK_DELTA
    hr_window_s: float = math.inf
    hr_stride_s: float = 1.0
    motion_suppression: bool = True
    detrend_lambda: float = 500.0

    def __post_init__(self):
        for name in ("window_s", "hop_s", "narrow_bw_hz", "peak_delta", "hr_stride_s"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        if self.hr_window_s <= 0:
            raise ValidationError("hr_window_s must be positive")

    def as_dict(self) -> dict:
        return {
            "window_s": self.window_s,
            "hop_s": self.hop_s,
            "band": list(self.band),
            "narrow_bw_hz": self.narrow_bw_hz,
            "peak_delta": self.peak_delta,
            "hr_window_s": "inf" if math.isinf(self.hr_window_s) else self.hr_window_s,
            "hr_stride_s": self.hr_stride_s,
            "motion_suppression": self.motion_suppression,
            "detrend_lambda": self.detrend_lambda,
        }


@dataclass
class StageTimings:
    """Wall-clock per stage; windowed stages keep one sample per window."""

    per_window: dict[str, list[float]] = field(default_factory=dict)
    totals: dict[str, float] = field(default_factory=dict)

    def add_window(self, stage: str, seconds: float):
        self.per_window.setdefault(stage, []).append(seconds)

    def add_total(self, stage: str, seconds: float):
        self.totals[stage] = self.totals.get(stage, 0.0) + seconds

    def summary_ms(self, n_frames: int, frames_per_hop: int) -> dict:
        out = {}
        for stage, samples in self.per_window.items():
            arr = np.array(samples) * 1000.0
            out[stage] = {
                "ms_per_frame_mean": float(np.mean(arr) / max(frames_per_hop, 1)),
                "ms_per_frame_std": float(np.std(arr) / max(frames_per_hop, 1)),
                "n_samples": len(arr),
            }
        for stage, total in self.totals.items():
            out[stage] = {
                "ms_per_frame_mean": total * 1000.0 / max(n_frames, 1),
                "ms_per_frame_std": 0.0,
                "n_samples": 1,
            }
        return out


@dataclass(frozen=True)
class AnalysisResult:
    rate: float
    bvp: UniformSignal
    beats: BeatSeries
    ibis: IbiSeries
    hr_series: HrSeries
    hrv: HrvReport
    meta: dict

    def hr_full(self) -> float | None:
        """Whole-recording heart rate in bpm, when computable."""
        surv = self.ibis.survivors()
        if len(surv) == 0:
            return None
        return 60000.0 / float(np.mean(surv.durations_ms))


def sliding_window_starts(n_samples: int, window: int, hop: int) -> list[int]:
    if n_samples < window:
        return []
    return list(range(0, n_samples - window + 1, hop))


@contextmanager
def _stage(name: str):
    """Tag errors escaping a pipeline phase with the phase name."""
    try:
        yield
    except PulsecamError as e:
        if not getattr(e, "stage", None):
            e.stage = name
        raise


def analyze_trace(trace: SampleTrace, config: PipelineConfig = PipelineConfig()) -> AnalysisResult:
    """Run the full pipeline over one trace.

    Resample to 30/60 Hz, slide the analysis window at hop_s, project each
    window to the raw pulse, pick the beat frequency from the motion-
    suppressed band-limited spectrum, narrowband-filter the raw window around
    it, overlap-add into the BVP, then detect beats and compute HR and HRV.

    Errors carry a `stage` attribute naming the pipeline stage they came from.
    """
    timings = StageTimings()
    t_start = time.perf_counter()
    with _stage("resample"):
        rate = choose_pipeline_rate(trace)
        channels = resample_uniform(trace, rate)
    timings.add_total("resample", time.perf_counter() - t_start)

    n = len(channels["r"])
    window = WINDOW_SAMPLES[rate]
    hop = max(1, round(config.hop_s * rate))
    starts = sliding_window_starts(n, window, hop)
    if not starts:
        with _stage("windowing"):
            raise InsufficientDataError(
                f"trace shorter than one {window / rate:.2f} s analysis window"
            )
    band = BandLimits(*config.band)
    has_pose = all(name in channels for name in POSE_CHANNELS)

    acc = BvpAccumulator(rate=rate, t0=channels["r"].t0)
    emitted = []
    last_center = None
    skipped_windows = 0

    for start in starts:
        t0 = time.perf_counter()
        with _stage(f"window@{start / rate:.2f}s"):
            rgb = RgbWindow(
                channels["r"].segment(start, window),
                channels["g"].segment(start, window),
                channels["b"].segment(start, window),
            )
            raw = pos_project(rgb)
            t1 = time.perf_counter()
            timings.add_window("pos_project", t1 - t0)

            raw_signal = UniformSignal(rgb.t0, rate, raw)
            spec = forward_spectrum(raw_signal)
            pose_spectra = None
            if has_pose and config.motion_suppression:
                pose_spectra = tuple(
                    forward_spectrum(channels[name].segment(start, window))
                    for name in POSE_CHANNELS
                )
            spec = suppress_motion(spec, pose_spectra, config.motion_suppression, band)
            spec = band_limit(spec, band)
            t2 = time.perf_counter()
            timings.add_window("spectral", t2 - t1)

            try:
                center = dominant_frequency(spec, band)
            except NoSignalError:
                if last_center is None:
                    skipped_windows += 1
                    continue
                center = last_center
            last_center = center

            filtered = narrowband_filter(raw_signal, center, config.narrow_bw_hz, band)
            t3 = time.perf_counter()
            timings.add_window("narrowband", t3 - t2)

            emitted.append(acc.add(filtered, rgb.t0).values)
            timings.add_window("overlap_add", time.perf_counter() - t3)

    confirmed_until = acc.t0 + acc.finalized_index / rate
    emitted.append(acc.flush().values)
    bvp = UniformSignal(acc.t0, rate, np.concatenate(emitted))

    t4 = time.perf_counter()
    with _stage("beat_detection"):
        beats = detect_peaks(bvp, config.peak_delta)
        ibis = filter_ibis(ibis_from_beats(beats))
        hr = heart_rate(ibis, config.hr_window_s, config.hr_stride_s)
    timings.add_total("beats_hr", time.perf_counter() - t4)

    t5 = time.perf_counter()
    with _stage("hrv"):
        hrv = hrv_report(ibis, beats, config.detrend_lambda)
    timings.add_total("hrv", time.perf_counter() - t5)
    wall_s = time.perf_counter() - t_start

    meta = {
        "rate_hz": rate,
        "window_samples": window,
        "hop_samples": hop,
        "window_count": len(starts),
        "skipped_windows": skipped_windows,
        "confirmed_until_s": confirmed_until,
        "gaps": trace.gap_stats(),
        "config": config.as_dict(),
        "timing_ms": timings.summary_ms(n, hop),
        "wall_s": wall_s,
        "realtime_factor": (len(trace.t) / max(trace.gap_stats()["median_fps"] or rate, 1e-9))
        / max(wall_s, 1e-9),
    }
    return AnalysisResult(rate, bvp, beats, ibis, hr, hrv, meta)


def hr_series_for_preset(result: AnalysisResult, window_s: float, stride_s: float = 1.0) -> HrSeries:
    """Recompute the HR series for another window preset from stored IBIs."""
    return heart_rate(result.ibis, window_s, stride_s)


def bench_trace(trace: SampleTrace, config: PipelineConfig = PipelineConfig(), repeats: int = 1) -> dict:
    """Per-stage timing report over one or more runs of the pipeline."""
    runs = []
    for _ in range(max(1, repeats)):
        result = analyze_trace(trace, config)
        runs.append(result.meta)
    stages = {}
    for name in runs[0]["timing_ms"]:
        means = [r["timing_ms"][name]["ms_per_frame_mean"] for r in runs]
        stds = [r["timing_ms"][name]["ms_per_frame_std"] for r in runs]
        stages[name] = {
            "ms_per_frame_mean": float(np.mean(means)),
            "ms_per_frame_std": float(np.mean(stds)),
            "n_samples": runs[0]["timing_ms"][name]["n_samples"],
        }
    return {
        "stages": stages,
        "wall_s": float(np.mean([r["wall_s"] for r in runs])),
        "realtime_factor": float(np.mean([r["realtime_factor"] for r in runs])),
        "runs": len(runs),
    }
