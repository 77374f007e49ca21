"""FFT-domain cleanup of the raw pulse: motion suppression, wide and narrow
band-pass filtering, and overlap-add reconstruction of the BVP waveform.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoSignalError, OrderingError, ValidationError
from .trace_io import UniformSignal

VALID_WINDOW_LENGTHS = (256, 512)

# Human heart-rate range: 42-240 bpm.
HEART_BAND = (0.7, 4.0)

NARROW_BANDWIDTH_HZ = 0.47


@dataclass(frozen=True)
class BandLimits:
    lo: float = HEART_BAND[0]
    hi: float = HEART_BAND[1]

    def __post_init__(self):
        if not 0 < self.lo < self.hi:
            raise ValidationError(f"need 0 < lo < hi, got ({self.lo}, {self.hi})")


@dataclass(frozen=True)
class Spectrum:
    """Full complex DFT of one window; bin k sits at k*rate/N (mod N)."""

    bins: np.ndarray
    rate: float

    def __post_init__(self):
        object.__setattr__(self, "bins", np.asarray(self.bins, dtype=np.complex128))

    def __len__(self) -> int:
        return len(self.bins)

    @property
    def resolution(self) -> float:
        return self.rate / len(self.bins)

    def frequencies(self) -> np.ndarray:
        """Signed bin frequencies, fftfreq layout."""
        return np.fft.fftfreq(len(self.bins), d=1.0 / self.rate)


def forward_spectrum(window: UniformSignal) -> Spectrum:
    """DFT of one analysis window; inverse_spectrum undoes it exactly."""
    n = len(window)
    if n not in VALID_WINDOW_LENGTHS:
        raise ValidationError(f"window length must be one of {VALID_WINDOW_LENGTHS}, got {n}")
    return Spectrum(np.fft.fft(window.values), window.rate)


def inverse_spectrum(spec: Spectrum) -> np.ndarray:
    """Real time-domain signal for a conjugate-symmetric spectrum."""
    return np.fft.ifft(spec.bins).real


def band_limit(spec: Spectrum, band: BandLimits = BandLimits()) -> Spectrum:
    """Zero every bin whose |frequency| lies outside [lo, hi]."""
    nyquist = spec.rate / 2
    if not band.hi < nyquist:
        raise ValidationError(f"band {band} exceeds Nyquist {nyquist} Hz")
    f = np.abs(spec.frequencies())
    keep = (f >= band.lo) & (f <= band.hi)
    return Spectrum(np.where(keep, spec.bins, 0.0), spec.rate)


def dominant_frequency(spec: Spectrum, band: BandLimits = BandLimits()) -> float:
    """Center frequency of the strongest in-band bin; ties go lower."""
    n = len(spec)
    k = np.arange(1, n // 2 + 1)
    f = k * spec.rate / n
    mask = (f >= band.lo) & (f <= band.hi)
    if not np.any(mask):
        raise NoSignalError("band contains no bins at this resolution")
    mags = np.abs(spec.bins[k[mask]])
    if np.max(mags) == 0.0:
        raise NoSignalError("all in-band bins are zero")
    # np.argmax returns the first maximum, i.e. the lowest tied frequency.
    return float(f[mask][np.argmax(mags)])


def suppress_motion(
    pulse: Spectrum,
    pose_spectra: tuple[Spectrum, Spectrum, Spectrum] | None,
    enabled: bool = True,
    band: BandLimits = BandLimits(),
) -> Spectrum:
    """Attenuate pulse bins where the head-orientation spectra are strong.

    The three pose magnitude spectra are averaged into one, scaled so its
    in-band maximum matches the pulse's, then subtracted from the pulse
    magnitudes (floored at zero). Pulse phases are kept. With enabled=False
    or no pose data this is the identity (the ablation switch).
    """
    if not enabled or pose_spectra is None:
        return Spectrum(pulse.bins.copy(), pulse.rate)
    n = len(pulse)
    for ps in pose_spectra:
        if len(ps) != n or ps.rate != pulse.rate:
            raise ValidationError("pose spectra must match pulse length and rate")
    head = np.mean([np.abs(ps.bins) for ps in pose_spectra], axis=0)
    mag = np.abs(pulse.bins)

    f = np.abs(pulse.frequencies())
    in_band = (f >= band.lo) & (f <= band.hi)
    head_max = np.max(head[in_band]) if np.any(in_band) else 0.0
    if head_max == 0.0:
        return Spectrum(pulse.bins.copy(), pulse.rate)
    scale = np.max(mag[in_band]) / head_max

    new_mag = np.maximum(0.0, mag - scale * head)
    phase = np.where(mag > 0, pulse.bins / np.where(mag > 0, mag, 1.0), 0.0)
    return Spectrum(new_mag * phase, pulse.rate)


def narrowband_filter(
    raw_window: UniformSignal,
    center: float,
    bandwidth: float = NARROW_BANDWIDTH_HZ,
    band: BandLimits = BandLimits(),
) -> np.ndarray:
    """Keep only bins within bandwidth/2 of the selected beat frequency.

    The passband is clamped to the heart band; realized by zeroing FFT bins
    and inverting, so the filter is zero-delay within the window.
    """
    if not band.lo <= center <= band.hi:
        raise ValidationError(f"center {center} Hz outside heart band {band}")
    lo = max(center - bandwidth / 2, band.lo)
    hi = min(center + bandwidth / 2, band.hi)
    spec = forward_spectrum(raw_window)
    f = np.abs(spec.frequencies())
    keep = (f >= lo) & (f <= hi)
    return np.fft.ifft(np.where(keep, spec.bins, 0.0)).real


def z_normalize(values: np.ndarray) -> np.ndarray:
    """Subtract mean, divide by population std; a flat window becomes zeros."""
    sigma = np.std(values)
    if sigma == 0.0:
        return np.zeros_like(values)
    return (values - np.mean(values)) / sigma


@dataclass
class BvpAccumulator:
    """Overlap-add state for successive filtered windows on one time grid.

    Each window is z-normalized and summed at its grid offset; every emitted
    sample is its running sum divided by how many windows covered it. Samples
    before the newest window's start can no longer change and are final.

    Single-writer: one accumulator per stream, never shared mutably.
    """

    rate: float
    t0: float
    _sum: np.ndarray = field(default_factory=lambda: np.zeros(0))
    _count: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    _finalized: int = 0  # everything below this index has been emitted

    def _start_index(self, window_start: float) -> int:
        exact = (window_start - self.t0) * self.rate
        idx = round(exact)
        if abs(exact - idx) > 1e-6:
            raise ValidationError(
                f"window start {window_start} s is off the {self.rate:g} Hz grid"
            )
        return int(idx)

    def add(self, window: np.ndarray, window_start: float) -> UniformSignal:
        """Fold one filtered window in; returns the newly finalized samples."""
        start = self._start_index(window_start)
        if start < self._finalized:
            raise OrderingError(
                f"window at index {start} precedes finalized index {self._finalized}"
            )
        end = start + len(window)
        if end > len(self._sum):
            pad = end - len(self._sum)
            self._sum = np.concatenate([self._sum, np.zeros(pad)])
            self._count = np.concatenate([self._count, np.zeros(pad, dtype=np.int64)])
        z = z_normalize(np.asarray(window, dtype=np.float64))
        self._sum[start:end] += z
        self._count[start:end] += 1
        return self._emit_upto(start)

    def _emit_upto(self, upto: int) -> UniformSignal:
        lo, hi = self._finalized, min(upto, len(self._sum))
        t_lo = self.t0 + lo / self.rate
        if hi <= lo:
            return UniformSignal(t_lo, self.rate, np.zeros(0))
        counts = np.maximum(self._count[lo:hi], 1)
        out = self._sum[lo:hi] / counts
        self._finalized = hi
        return UniformSignal(t_lo, self.rate, out)

    def flush(self) -> UniformSignal:
        """Finalize and emit every remaining sample (end of stream)."""
        return self._emit_upto(len(self._sum))

    @property
    def finalized_index(self) -> int:
        return self._finalized
