"""Trace and ground-truth file I/O plus resampling to a fixed pipeline rate.

Trace CSV schema: header ``t,r,g,b`` or ``t,r,g,b,pitch,roll,yaw``; ``t`` in
seconds, colors as 0-255 floats, angles in degrees. Ground-truth waveform CSV:
first line ``# rate=<Hz> kind=<ppg|ecg>``, then ``t,v`` rows. Both UTF-8 with
``\\n`` line endings and ``.`` as the decimal separator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, ParseError, ValidationError

TRACE_HEADER_BASE = ["t", "r", "g", "b"]
TRACE_HEADER_POSE = ["t", "r", "g", "b", "pitch", "roll", "yaw"]

COLOR_CHANNELS = ("r", "g", "b")
POSE_CHANNELS = ("pitch", "roll", "yaw")


@dataclass(frozen=True)
class UniformSignal:
    """Fixed-rate 1-D sample sequence; sample k sits at t0 + k/rate."""

    t0: float
    rate: float
    values: np.ndarray

    def __post_init__(self):
        if self.rate <= 0:
            raise ValidationError(f"rate must be positive, got {self.rate}")
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def duration(self) -> float:
        return 0.0 if len(self) == 0 else (len(self) - 1) / self.rate

    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self.values)) / self.rate

    def segment(self, start: int, length: int) -> "UniformSignal":
        """Slice [start, start+length) as a new signal with shifted t0."""
        if start < 0 or start + length > len(self):
            raise ValidationError("segment out of range")
        return UniformSignal(self.t0 + start / self.rate, self.rate,
                             self.values[start:start + length])


@dataclass(frozen=True)
class SampleTrace:
    """Per-frame timestamped RGB means with optional head-pose angles."""

    t: np.ndarray
    r: np.ndarray
    g: np.ndarray
    b: np.ndarray
    pitch: np.ndarray | None = None
    roll: np.ndarray | None = None
    yaw: np.ndarray | None = None
    source_id: str = ""

    def __post_init__(self):
        for name in ("t", "r", "g", "b"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        for name in POSE_CHANNELS:
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, np.asarray(v, dtype=np.float64))
        self._validate()

    def _validate(self):
        n = len(self.t)
        for name in ("r", "g", "b"):
            if len(getattr(self, name)) != n:
                raise ValidationError(f"channel {name} length mismatch")
        if n >= 2 and not np.all(np.diff(self.t) > 0):
            raise ValidationError("non-increasing timestamps")
        for name in ("r", "g", "b"):
            v = getattr(self, name)
            if not np.all(np.isfinite(v)):
                raise ValidationError(f"non-finite value in channel {name}")
            if np.any(v < 0):
                raise ValidationError(f"negative value in channel {name}")
        pose_present = [getattr(self, name) is not None for name in POSE_CHANNELS]
        if any(pose_present) and not all(pose_present):
            raise ValidationError("pose columns must be all present or all absent")
        if self.has_pose:
            for name in POSE_CHANNELS:
                if len(getattr(self, name)) != n:
                    raise ValidationError(f"channel {name} length mismatch")
                if not np.all(np.isfinite(getattr(self, name))):
                    raise ValidationError(f"non-finite value in channel {name}")

    @property
    def has_pose(self) -> bool:
        return self.pitch is not None

    def __len__(self) -> int:
        return len(self.t)

    def frame_intervals(self) -> np.ndarray:
        return np.diff(self.t)

    def gap_stats(self) -> dict:
        """Frame-gap statistics kept as metadata (no gap imputation is done)."""
        if len(self) < 2:
            return {"median_fps": None, "max_gap_s": None, "n_long_gaps": 0}
        dt = self.frame_intervals()
        med = float(np.median(dt))
        return {
            "median_fps": 1.0 / med,
            "max_gap_s": float(np.max(dt)),
            "n_long_gaps": int(np.sum(dt > 1.5 * med)),
        }


@dataclass(frozen=True)
class GroundTruthRecord:
    """Reference PPG or ECG waveform at its recorded rate."""

    waveform: UniformSignal
    kind: str

    def __post_init__(self):
        if self.kind not in ("ppg", "ecg"):
            raise ValidationError(f"kind must be ppg or ecg, got {self.kind!r}")
        if not np.all(np.isfinite(self.waveform.values)):
            raise ValidationError("non-finite sample in ground-truth waveform")


def _parse_float(token: str, line: int, col: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"column {col!r}: not a number: {token!r}", line) from None


def parse_trace(data: bytes | str, source_id: str = "") -> SampleTrace:
    """Parse a trace CSV into a validated SampleTrace, preserving row order."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = text.split("\n")
    if not lines or not lines[0].strip():
        raise ParseError("empty trace file", 1)
    header = [h.strip() for h in lines[0].split(",")]
    if header == TRACE_HEADER_BASE:
        has_pose = False
    elif header == TRACE_HEADER_POSE:
        has_pose = True
    else:
        raise ParseError(f"unrecognized header {lines[0].strip()!r}", 1)
    ncols = len(header)

    columns: list[list[float]] = [[] for _ in range(ncols)]
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != ncols:
            raise ParseError(f"expected {ncols} columns, got {len(parts)}", i)
        for j, (tok, col) in enumerate(zip(parts, header)):
            columns[j].append(_parse_float(tok.strip(), i, col))

    kwargs = dict(zip(header, (np.array(c) for c in columns)))
    if not has_pose:
        kwargs.update(pitch=None, roll=None, yaw=None)
    return SampleTrace(source_id=source_id, **kwargs)


def serialize_trace(trace: SampleTrace) -> bytes:
    """Write a trace back to CSV at full float precision (round-trips exactly)."""
    header = TRACE_HEADER_POSE if trace.has_pose else TRACE_HEADER_BASE
    rows = [",".join(header)]
    cols = [trace.t, trace.r, trace.g, trace.b]
    if trace.has_pose:
        cols += [trace.pitch, trace.roll, trace.yaw]
    for vals in zip(*cols):
        rows.append(",".join(repr(float(v)) for v in vals))
    return ("\n".join(rows) + "\n").encode("utf-8")


def parse_gt_waveform(data: bytes | str) -> GroundTruthRecord:
    """Parse a ground-truth waveform CSV into a GroundTruthRecord."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = text.split("\n")
    if not lines or not lines[0].startswith("#"):
        raise ParseError("missing '# rate=<Hz> kind=<ppg|ecg>' header", 1)
    fields = dict(
        tok.split("=", 1) for tok in lines[0].lstrip("#").split() if "=" in tok
    )
    if "rate" not in fields:
        raise ParseError("missing rate in header", 1)
    if "kind" not in fields:
        raise ParseError("missing kind in header", 1)
    rate = _parse_float(fields["rate"], 1, "rate")
    if rate <= 0:
        raise ValidationError(f"rate must be positive, got {rate}")

    ts, vs = [], []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"expected 2 columns, got {len(parts)}", i)
        ts.append(_parse_float(parts[0].strip(), i, "t"))
        vs.append(_parse_float(parts[1].strip(), i, "v"))
    if not vs:
        raise ParseError("no samples", 2)
    values = np.array(vs)
    if not np.all(np.isfinite(values)):
        raise ValidationError("non-finite sample in ground-truth waveform")
    t = np.array(ts)
    expected = t[0] + np.arange(len(t)) / rate
    if np.max(np.abs(t - expected)) > 1e-6:
        raise ValidationError("timestamps do not match the declared rate")
    return GroundTruthRecord(UniformSignal(t[0], rate, values), fields["kind"])


def serialize_gt_waveform(record: GroundTruthRecord) -> bytes:
    rows = [f"# rate={record.waveform.rate:g} kind={record.kind}"]
    for t, v in zip(record.waveform.times(), record.waveform.values):
        rows.append(f"{repr(float(t))},{repr(float(v))}")
    return ("\n".join(rows) + "\n").encode("utf-8")


def choose_pipeline_rate(trace: SampleTrace) -> int:
    """Pick 30 or 60 Hz, whichever is closer to the trace frame rate.

    The median instantaneous rate decides, so variable-frame-rate drops do
    not skew the choice; the 45 Hz midpoint ties toward 30.
    """
    if len(trace) < 2:
        raise InsufficientDataError("need at least 2 samples to estimate frame rate")
    median_fps = float(np.median(1.0 / trace.frame_intervals()))
    # epsilon so a trace at exactly 45 fps lands on 30 despite float noise
    return 30 if median_fps <= 45.0 + 1e-9 else 60


def _grid_length(t_first: float, t_last: float, rate: float) -> int:
    # floor with a small epsilon so exact multiples of 1/rate are not lost
    # to float rounding; never extrapolates past t_last.
    return int(math.floor((t_last - t_first) * rate + 1e-9)) + 1


def resample_uniform(trace: SampleTrace, rate: float) -> dict[str, UniformSignal]:
    """Linearly resample every trace channel onto a fixed-rate grid.

    The grid starts at the first timestamp and never extends beyond the last
    one. Returns a dict with keys r, g, b and, when present, pitch/roll/yaw.
    """
    if len(trace) == 0:
        raise InsufficientDataError("empty trace")
    if rate <= 0:
        raise ValidationError(f"rate must be positive, got {rate}")
    t0 = float(trace.t[0])
    n = _grid_length(t0, float(trace.t[-1]), rate) if len(trace) > 1 else 1
    grid = t0 + np.arange(n) / rate
    channels = list(COLOR_CHANNELS) + (list(POSE_CHANNELS) if trace.has_pose else [])
    return {
        name: UniformSignal(t0, rate, np.interp(grid, trace.t, getattr(trace, name)))
        for name in channels
    }
