"""Turn windowed RGB signals into a single raw pulse signal.

The combination projects temporally normalized color channels onto the plane
orthogonal to the skin-tone direction, then mixes the two projected signals
with a standard-deviation weight so the pulsating component dominates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateChannelError, ValidationError
from .trace_io import UniformSignal

# Window lengths are powers of two so the FFT stages stay fast: 8.53 s is
# 256 frames at 30 Hz and 512 frames at 60 Hz.
WINDOW_SAMPLES = {30: 256, 60: 512}
WINDOW_SECONDS = 8.53

# Projection rows applied to the normalized (R, G, B) channels: the first
# isolates G-B, the second G+B-2R; both are orthogonal to (1,1,1), the
# direction pure intensity changes live in after normalization.
_PROJECTION = np.array([[0.0, 1.0, -1.0], [-2.0, 1.0, 1.0]])


@dataclass(frozen=True)
class RgbWindow:
    """Equal-length r/g/b segments sharing one grid; one analysis window."""

    r: UniformSignal
    g: UniformSignal
    b: UniformSignal

    def __post_init__(self):
        rate = self.r.rate
        n = len(self.r)
        for ch in (self.g, self.b):
            if ch.rate != rate or len(ch) != n or ch.t0 != self.r.t0:
                raise ValidationError("window channels must share grid and length")
        expected = WINDOW_SAMPLES.get(int(rate))
        if expected is not None and n != expected:
            raise ValidationError(
                f"window at {rate:g} Hz must be {expected} samples, got {n}"
            )

    @property
    def rate(self) -> float:
        return self.r.rate

    @property
    def t0(self) -> float:
        return self.r.t0

    def __len__(self) -> int:
        return len(self.r)


def spatial_average(pixels) -> tuple[float, float, float]:
    """Arithmetic mean of (r, g, b) tuples across one frame's RoI pixels."""
    arr = np.asarray(pixels, dtype=np.float64)
    if arr.size == 0:
        raise ValidationError("empty RoI: no pixels to average")
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValidationError("pixels must be an Nx3 array of (r, g, b)")
    means = arr.mean(axis=0)
    return float(means[0]), float(means[1]), float(means[2])


def pos_project(window: RgbWindow) -> np.ndarray:
    """Combine an RGB window into the raw pulse signal.

    Each channel is divided by its window mean, projected through the two
    plane rows, and the results are summed with weight std(S1)/std(S2).
    Output length equals input length; degenerate std(S2)=0 falls back to S1.
    """
    stack = np.vstack([window.r.values, window.g.values, window.b.values])
    means = stack.mean(axis=1)
    if np.any(means <= 0):
        raise DegenerateChannelError("channel mean must be positive inside a window")
    normalized = stack / means[:, None]
    s1, s2 = _PROJECTION @ normalized
    sigma2 = np.std(s2)
    if sigma2 == 0.0:
        return s1.copy()
    return s1 + (np.std(s1) / sigma2) * s2
