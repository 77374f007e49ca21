"""pulsecam: camera pulse-trace analysis.

Converts per-frame skin-region RGB means (plus optional head-pose traces)
into a clean blood-volume-pulse waveform, individually timed heart beats,
heart rate, and heart-rate-variability metrics. Ships an evaluation harness
against cleaned ground-truth peaks and a human-in-the-loop peak-cleaning
service.
"""

from .beat_analysis import BeatSeries, HrSeries, IbiSeries, detect_peaks, filter_ibis, heart_rate, ibis_from_beats
from .errors import (
    InsufficientDataError,
    ParseError,
    PulsecamError,
    ValidationError,
)
from .hrv_metrics import HrvReport, hrv_report, rmssd, sdnn
from .pipeline import AnalysisResult, PipelineConfig, analyze_trace, bench_trace
from .synth import MotionSpec, SynthConfig, synth_trace
from .trace_io import (
    GroundTruthRecord,
    SampleTrace,
    UniformSignal,
    choose_pipeline_rate,
    parse_gt_waveform,
    parse_trace,
    resample_uniform,
    serialize_trace,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisResult",
    "BeatSeries",
    "GroundTruthRecord",
    "HrSeries",
    "HrvReport",
    "IbiSeries",
    "InsufficientDataError",
    "MotionSpec",
    "ParseError",
    "PipelineConfig",
    "PulsecamError",
    "SampleTrace",
    "SynthConfig",
    "UniformSignal",
    "ValidationError",
    "analyze_trace",
    "bench_trace",
    "choose_pipeline_rate",
    "detect_peaks",
    "filter_ibis",
    "heart_rate",
    "hrv_report",
    "ibis_from_beats",
    "parse_gt_waveform",
    "parse_trace",
    "resample_uniform",
    "rmssd",
    "sdnn",
    "serialize_trace",
    "synth_trace",
]
