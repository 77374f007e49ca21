"""Time- and frequency-domain heart-rate-variability metrics.

RMSSD and SDNN come straight from the filtered inter-beat intervals. The
spectral metrics go through a 4 Hz cubic-spline tachogram, smoothness-priors
detrending, and a Welch periodogram integrated over the LF and HF bands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse
from scipy.interpolate import CubicSpline
from scipy.linalg import solveh_banded

from .beat_analysis import BeatSeries, IbiSeries
from .errors import InsufficientDataError, UndefinedMetricError, ValidationError
from .trace_io import UniformSignal

TACHOGRAM_RATE_HZ = 4.0
DETREND_LAMBDA = 500.0

LF_BAND = (0.04, 0.15)
HF_BAND = (0.15, 0.40)

WELCH_SEGMENT = 256  # 64 s at 4 Hz: resolves the LF band lower edge
WELCH_OVERLAP = 0.5

# Band powers below this (ms^2) are treated as numerically zero: a constant
# tachogram detrends to float residue, not exact zeros.
_POWER_FLOOR = 1e-9


@dataclass(frozen=True)
class Periodogram:
    frequencies: np.ndarray
    power: np.ndarray  # ms^2/Hz

    def __post_init__(self):
        object.__setattr__(self, "frequencies", np.asarray(self.frequencies, dtype=np.float64))
        object.__setattr__(self, "power", np.asarray(self.power, dtype=np.float64))


@dataclass(frozen=True)
class HrvReport:
    rmssd_ms: float | None
    sdnn_ms: float | None
    lf_nu: float | None
    hf_nu: float | None
    lf_hf: float | None
    n_ibis_used: int

    def as_dict(self) -> dict:
        return {
            "rmssd_ms": self.rmssd_ms,
            "sdnn_ms": self.sdnn_ms,
            "lf_nu": self.lf_nu,
            "hf_nu": self.hf_nu,
            "lf_hf": self.lf_hf,
            "n_ibis_used": self.n_ibis_used,
        }


def _sigma1_mask(values: np.ndarray) -> np.ndarray:
    """Keep intervals within one standard deviation of the mean (inclusive)."""
    sigma = np.std(values)
    return np.abs(values - np.mean(values)) <= sigma


def rmssd(ibis: IbiSeries) -> float:
    """Root mean square of successive differences over 1-sigma-kept pairs.

    Only intervals within one standard deviation of the mean enter; a
    difference counts only when both intervals survive and were adjacent in
    the original beat sequence (exclusions break pairs, they are skipped).
    """
    surv = ibis.survivors()
    if len(surv) < 3:
        raise InsufficientDataError("need at least 3 intervals for RMSSD")
    keep = _sigma1_mask(surv.durations_ms)
    if np.sum(keep) < 3:
        raise InsufficientDataError("fewer than 3 intervals within one sigma")
    d = surv.durations_ms
    idx = surv.start_indices
    diffs = [
        d[i + 1] - d[i]
        for i in range(len(d) - 1)
        if keep[i] and keep[i + 1] and idx[i + 1] == idx[i] + 1
    ]
    if not diffs:
        raise InsufficientDataError("no adjacent interval pairs survive the 1-sigma mask")
    return float(np.sqrt(np.mean(np.square(diffs))))


def sdnn(ibis: IbiSeries) -> float:
    """Population standard deviation of the surviving intervals."""
    surv = ibis.survivors()
    if len(surv) < 2:
        raise InsufficientDataError("need at least 2 intervals for SDNN")
    return float(np.std(surv.durations_ms))


def interpolate_tachogram(ibis: IbiSeries, beats: BeatSeries) -> UniformSignal:
    """Cubic-spline the (end-beat time, duration) points onto a 4 Hz grid.

    Natural boundary conditions; the grid covers exactly the knot span.
    """
    surv = ibis.survivors()
    if len(surv) < 4:
        raise InsufficientDataError("need at least 4 intervals for a cubic spline")
    knot_t = beats.times[surv.start_indices + 1]
    spline = CubicSpline(knot_t, surv.durations_ms, bc_type="natural")
    n = int(math.floor((knot_t[-1] - knot_t[0]) * TACHOGRAM_RATE_HZ + 1e-9)) + 1
    grid = knot_t[0] + np.arange(n) / TACHOGRAM_RATE_HZ
    return UniformSignal(float(knot_t[0]), TACHOGRAM_RATE_HZ, spline(grid))


def detrend(tacho: UniformSignal, smoothing: float = DETREND_LAMBDA) -> UniformSignal:
    """Smoothness-priors detrending: subtract the regularized trend.

    The trend solves (I + lambda^2 D2'D2) trend = z with D2 the second
    difference operator; solved in banded form (the matrix is pentadiagonal
    symmetric positive definite).
    """
    z = tacho.values
    n = len(z)
    if n < 3:
        raise InsufficientDataError("need at least 3 samples to detrend")
    d2 = scipy.sparse.diags(
        [np.ones(n - 2), -2 * np.ones(n - 2), np.ones(n - 2)],
        offsets=[0, 1, 2],
        shape=(n - 2, n),
    )
    a = scipy.sparse.eye(n) + smoothing**2 * (d2.T @ d2)
    a = a.todia()
    # upper banded storage for solveh_banded: row i holds diagonal (2 - i)
    ab = np.zeros((3, n))
    offsets = {off: i for i, off in enumerate(a.offsets)}
    for diag_offset, row in ((2, 0), (1, 1), (0, 2)):
        if diag_offset in offsets:
            ab[row] = a.data[offsets[diag_offset]]
    trend = solveh_banded(ab, z)
    return UniformSignal(tacho.t0, tacho.rate, z - trend)


def _hann_periodic(n: int) -> np.ndarray:
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(n) / n))


def welch_psd(tacho: UniformSignal, nperseg: int = WELCH_SEGMENT) -> Periodogram:
    """Welch power spectral density: Hann taper, 50% overlap, per-segment
    mean removal, one-sided density scaling. Short inputs fall back to a
    single full-length segment.
    """
    x = tacho.values
    if len(x) == 0:
        raise InsufficientDataError("empty tachogram")
    fs = tacho.rate
    seg_len = min(nperseg, len(x))
    step = max(1, int(seg_len * (1.0 - WELCH_OVERLAP)))
    window = _hann_periodic(seg_len)
    win_power = np.sum(window**2)

    psd_sum = np.zeros(seg_len // 2 + 1)
    n_segments = 0
    for start in range(0, len(x) - seg_len + 1, step):
        seg = x[start:start + seg_len]
        seg = (seg - np.mean(seg)) * window
        spec = np.fft.rfft(seg)
        p = (np.abs(spec) ** 2) / (fs * win_power)
        p[1:] *= 2.0
        if seg_len % 2 == 0:
            p[-1] /= 2.0
        psd_sum += p
        n_segments += 1
    freqs = np.fft.rfftfreq(seg_len, d=1.0 / fs)
    return Periodogram(freqs, psd_sum / n_segments)


def lf_hf(psd: Periodogram) -> tuple[float, float, float]:
    """Band powers in normalized units and their ratio.

    Each bin is assigned wholly by its center frequency; the 0.15 Hz boundary
    bin goes to HF so nothing is counted twice.
    """
    f = psd.frequencies
    if f[-1] < HF_BAND[1]:
        raise ValidationError("periodogram does not cover the HF band")
    df = f[1] - f[0] if len(f) > 1 else 1.0
    lf_mask = (f >= LF_BAND[0]) & (f < LF_BAND[1])
    hf_mask = (f >= HF_BAND[0]) & (f <= HF_BAND[1])
    lf = float(np.sum(psd.power[lf_mask]) * df)
    hf = float(np.sum(psd.power[hf_mask]) * df)
    total = lf + hf
    if total <= 0.0:
        raise UndefinedMetricError("zero power in both LF and HF bands")
    return lf / total, hf / total, (lf / hf if hf > 0 else math.inf)


def hrv_report(
    ibis: IbiSeries,
    beats: BeatSeries,
    detrend_lambda: float = DETREND_LAMBDA,
) -> HrvReport:
    """Full HRV summary; metrics that cannot be computed are left undefined
    rather than guessed (constant input yields 0/0/None/None/None).
    """
    surv = ibis.survivors()
    try:
        rmssd_val = rmssd(ibis)
    except InsufficientDataError:
        rmssd_val = None
    try:
        sdnn_val = sdnn(ibis)
    except InsufficientDataError:
        sdnn_val = None

    lf_nu = hf_nu = ratio = None
    try:
        tacho = interpolate_tachogram(ibis, beats)
        psd = welch_psd(detrend(tacho, detrend_lambda))
        f = psd.frequencies
        df = f[1] - f[0] if len(f) > 1 else 1.0
        band_power = float(np.sum(psd.power[(f >= LF_BAND[0]) & (f <= HF_BAND[1])]) * df)
        if band_power > _POWER_FLOOR:
            lf_nu, hf_nu, ratio = lf_hf(psd)
    except (InsufficientDataError, UndefinedMetricError):
        pass
    return HrvReport(rmssd_val, sdnn_val, lf_nu, hf_nu, ratio, int(len(surv)))
