"""Locate individual beats on the BVP and derive filtered inter-beat
intervals and heart rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .trace_io import UniformSignal

DEFAULT_PEAK_DELTA = 0.3

# Physiologically plausible inter-beat interval range (ms).
IBI_RANGE_MS = (250.0, 2000.0)

FLAG_RAW = "raw"
FLAG_RANGE = "range_rejected"
FLAG_SIGMA3 = "sigma3_rejected"
FLAG_SIGMA1 = "sigma1_excluded"


@dataclass(frozen=True)
class BeatSeries:
    """Strictly increasing beat timestamps in seconds."""

    times: np.ndarray
    source: str = "rppg"

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=np.float64))
        if len(self.times) >= 2 and not np.all(np.diff(self.times) > 0):
            raise ValidationError("beat times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class IbiSeries:
    """Intervals between consecutive beats with per-interval filter flags.

    start_indices index into the originating beat list, so adjacency survives
    filtering: two intervals are successive iff their indices differ by 1.
    start_times are the interval start-beat timestamps (seconds).
    """

    durations_ms: np.ndarray
    start_indices: np.ndarray
    start_times: np.ndarray
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "durations_ms", np.asarray(self.durations_ms, dtype=np.float64))
        object.__setattr__(self, "start_indices", np.asarray(self.start_indices, dtype=np.int64))
        object.__setattr__(self, "start_times", np.asarray(self.start_times, dtype=np.float64))
        if not self.flags:
            object.__setattr__(self, "flags", tuple(FLAG_RAW for _ in self.durations_ms))
        if not (len(self.durations_ms) == len(self.start_indices)
                == len(self.start_times) == len(self.flags)):
            raise ValidationError("IbiSeries field lengths differ")

    def __len__(self) -> int:
        return len(self.durations_ms)

    @property
    def surviving(self) -> np.ndarray:
        return np.array([f == FLAG_RAW for f in self.flags], dtype=bool)

    def survivors(self) -> "IbiSeries":
        keep = self.surviving
        return IbiSeries(
            self.durations_ms[keep],
            self.start_indices[keep],
            self.start_times[keep],
            tuple(f for f in self.flags if f == FLAG_RAW),
        )

    @property
    def end_times(self) -> np.ndarray:
        return self.start_times + self.durations_ms / 1000.0


@dataclass(frozen=True)
class HrEntry:
    window_center: float
    bpm: float
    window_s: float


@dataclass(frozen=True)
class HrSeries:
    entries: tuple[HrEntry, ...] = ()

    def centers(self) -> np.ndarray:
        return np.array([e.window_center for e in self.entries])

    def bpms(self) -> np.ndarray:
        return np.array([e.bpm for e in self.entries])

    def __len__(self) -> int:
        return len(self.entries)


def detect_peaks(signal: UniformSignal, delta: float = DEFAULT_PEAK_DELTA) -> BeatSeries:
    """Gradient-style alternating max/min scan; beats are the crests.

    A running maximum is emitted once the signal has dropped by at least
    delta below it, after which a minimum is sought symmetrically, and so on.
    """
    if delta <= 0:
        raise ValidationError("delta must be positive")
    idx = _scan_maxima(signal.values, delta)
    return BeatSeries(signal.t0 + np.asarray(idx, dtype=np.float64) / signal.rate)


def _scan_maxima(values: np.ndarray, delta: float) -> list[int]:
    maxima: list[int] = []
    mn, mx = math.inf, -math.inf
    mx_pos = 0
    looking_for_max = True
    for i, v in enumerate(values):
        if v > mx:
            mx, mx_pos = v, i
        if v < mn:
            mn = v
        if looking_for_max:
            if v < mx - delta:
                maxima.append(mx_pos)
                mn = v
                looking_for_max = False
        else:
            if v > mn + delta:
                mx, mx_pos = v, i
                looking_for_max = True
    return maxima


def ibis_from_beats(beats: BeatSeries) -> IbiSeries:
    """N beats -> N-1 raw intervals in milliseconds."""
    t = beats.times
    if len(t) < 2:
        return IbiSeries(np.zeros(0), np.zeros(0, dtype=np.int64), np.zeros(0))
    return IbiSeries(np.diff(t) * 1000.0, np.arange(len(t) - 1), t[:-1])


def filter_ibis(ibis: IbiSeries) -> IbiSeries:
    """Two-pass outlier rejection, order preserved.

    Pass 1 flags intervals outside the plausible 250-2000 ms range; pass 2
    flags range-survivors farther than three standard deviations from the
    survivors' mean. Statistics deliberately exclude the range rejects so a
    gross artefact cannot widen its own acceptance band.
    """
    flags = list(ibis.flags)
    d = ibis.durations_ms
    in_range = (d >= IBI_RANGE_MS[0]) & (d <= IBI_RANGE_MS[1])
    for i, ok in enumerate(in_range):
        if flags[i] == FLAG_RAW and not ok:
            flags[i] = FLAG_RANGE
    candidates = np.array([f == FLAG_RAW for f in flags], dtype=bool)
    if np.any(candidates):
        vals = d[candidates]
        mean, sigma = float(np.mean(vals)), float(np.std(vals))
        for i in np.flatnonzero(candidates):
            if abs(d[i] - mean) > 3.0 * sigma:
                flags[i] = FLAG_SIGMA3
    return IbiSeries(d, ibis.start_indices, ibis.start_times, tuple(flags))


def heart_rate(
    ibis: IbiSeries,
    window_s: float = math.inf,
    stride_s: float = 1.0,
) -> HrSeries:
    """Mean-IBI heart rate per window placement on an absolute stride grid.

    An interval belongs to a window when its start beat falls inside it;
    windows with no surviving interval emit nothing. window_s=inf yields a
    single whole-recording entry.
    """
    if window_s <= 0:
        raise ValidationError("window_s must be positive")
    surv = ibis.survivors()
    if len(surv) == 0:
        return HrSeries()
    t = surv.start_times
    d = surv.durations_ms
    if math.isinf(window_s):
        center = float((t[0] + surv.end_times[-1]) / 2)
        return HrSeries((HrEntry(center, 60000.0 / float(np.mean(d)), math.inf),))
    entries = []
    k_lo = math.ceil(t[0] / stride_s)
    k_hi = math.floor(surv.end_times[-1] / stride_s)
    for k in range(k_lo, k_hi + 1):
        center = k * stride_s
        mask = (t >= center - window_s / 2) & (t < center + window_s / 2)
        if np.any(mask):
            entries.append(HrEntry(center, 60000.0 / float(np.mean(d[mask])), window_s))
    return HrSeries(tuple(entries))
