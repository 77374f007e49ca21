"""Synthetic trace generator with exactly known beats, HRV, motion and noise.

Every end-to-end claim is tested against traces produced here: the generator
returns the beat times and the HRV report computed from the generating
intervals through the same metric code the pipeline uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beat_analysis import BeatSeries, filter_ibis, ibis_from_beats
from .errors import ValidationError
from .hrv_metrics import HrvReport, hrv_report
from .trace_io import SampleTrace

BASE_RGB = (120.0, 100.0, 90.0)

# Pulse direction in relative channel units: a plausible skin-tone pulse
# axis, deliberately not proportional to (1,1,1) so the projection stage can
# separate it from intensity. A fixture constant, not a physiological claim.
PULSE_DIRECTION = np.array([0.33, 0.77, 0.53])
PULSE_DIRECTION = PULSE_DIRECTION / np.linalg.norm(PULSE_DIRECTION)

# Color direction of coupled motion shading. Head motion changes shading
# non-uniformly across channels, which is exactly why it corrupts the
# projected pulse; a direction the projection cancels would make the
# motion-suppression fixtures vacuous.
MOTION_DIRECTION = np.array([0.5, 1.0, 0.7])
MOTION_DIRECTION = MOTION_DIRECTION / np.linalg.norm(MOTION_DIRECTION)

# Second-harmonic fraction of the pulse shape: a pure sinusoid would make
# narrowband filtering trivially easy.
SECOND_HARMONIC = 0.3

IBI_HARD_RANGE_MS = (250.0, 2000.0)


@dataclass(frozen=True)
class MotionSpec:
    freq_hz: float
    amplitude: float
    coupled: bool = True


@dataclass(frozen=True)
class SynthConfig:
    duration_s: float = 300.0
    rate_hz: float = 30.0
    mean_hr_bpm: float = 60.0
    ibi_mod_freq_hz: float = 0.0
    ibi_mod_amp_ms: float = 0.0
    explicit_ibis_ms: tuple[float, ...] | None = None
    pulse_amplitude: float = 0.005
    motion: MotionSpec | None = None
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ValidationError("duration must be positive")
        if self.rate_hz <= 0:
            raise ValidationError("rate must be positive")
        if not 42.0 <= self.mean_hr_bpm <= 240.0:
            raise ValidationError(
                f"mean HR {self.mean_hr_bpm} bpm outside the 42-240 target band"
            )
        if self.pulse_amplitude < 0 or self.ibi_mod_amp_ms < 0 or self.noise_sigma < 0:
            raise ValidationError("amplitudes must be non-negative")


@dataclass(frozen=True)
class SynthOutput:
    trace: SampleTrace
    truth_beats: BeatSeries
    truth_hrv: HrvReport
    truth_ibis_ms: np.ndarray


def synth_ibis(config: SynthConfig) -> tuple[np.ndarray, np.ndarray]:
    """Generate the interval sequence and cumulative beat times.

    IBI_k = 60000/HR + amp*sin(2*pi*freq*t_k), evaluated at the interval's
    start beat; beats start at t=0 and stop at the configured duration.
    """
    if config.explicit_ibis_ms is not None:
        ibis = np.asarray(config.explicit_ibis_ms, dtype=np.float64)
        _check_ibi_range(ibis)
        beats = np.concatenate([[0.0], np.cumsum(ibis) / 1000.0])
        return ibis, beats
    base_ms = 60000.0 / config.mean_hr_bpm
    beats = [0.0]
    ibis = []
    while True:
        t = beats[-1]
        ibi = base_ms
        if config.ibi_mod_amp_ms > 0:
            ibi += config.ibi_mod_amp_ms * np.sin(2 * np.pi * config.ibi_mod_freq_hz * t)
        if not IBI_HARD_RANGE_MS[0] < ibi < IBI_HARD_RANGE_MS[1]:
            raise ValidationError(
                f"configured modulation drives IBI to {ibi:.1f} ms, outside "
                f"({IBI_HARD_RANGE_MS[0]:g}, {IBI_HARD_RANGE_MS[1]:g})"
            )
        t_next = t + ibi / 1000.0
        if t_next > config.duration_s:
            break
        beats.append(t_next)
        ibis.append(ibi)
    if not ibis:
        raise ValidationError("duration too short for a single beat interval")
    return np.asarray(ibis), np.asarray(beats)


def _check_ibi_range(ibis: np.ndarray):
    if np.any(ibis <= IBI_HARD_RANGE_MS[0]) or np.any(ibis >= IBI_HARD_RANGE_MS[1]):
        raise ValidationError("explicit IBI outside the plausible range")


def _beat_phase(t: np.ndarray, beats: np.ndarray) -> np.ndarray:
    """Continuous phase that is exactly k at beat k and linear in between."""
    k = np.clip(np.searchsorted(beats, t, side="right") - 1, 0, len(beats) - 2)
    t0, t1 = beats[k], beats[k + 1]
    return k + (t - t0) / (t1 - t0)


def pulse_waveform(t: np.ndarray, beats: np.ndarray) -> np.ndarray:
    """Two-harmonic pulse shape with crests exactly at the beat times."""
    phase = _beat_phase(t, beats)
    return np.cos(2 * np.pi * phase) + SECOND_HARMONIC * np.cos(4 * np.pi * phase)


def synth_trace(config: SynthConfig) -> SynthOutput:
    """Deterministic trace for a config; same seed, same bytes."""
    ibis, beats = synth_ibis(config)
    n = int(round(config.duration_s * config.rate_hz)) + 1
    t = np.arange(n) / config.rate_hz
    # keep samples strictly inside the beat span so the phase is defined
    t = t[t <= beats[-1]]

    pulse = pulse_waveform(t, beats)
    channels = {}
    rng = np.random.default_rng(config.seed)
    for i, name in enumerate(("r", "g", "b")):
        base = BASE_RGB[i]
        v = base * (1.0 + config.pulse_amplitude * PULSE_DIRECTION[i] * pulse)
        if config.motion is not None and config.motion.coupled:
            shading = config.motion.amplitude * MOTION_DIRECTION[i]
            v = v + base * shading * np.sin(2 * np.pi * config.motion.freq_hz * t)
        if config.noise_sigma > 0:
            v = v + rng.normal(0.0, config.noise_sigma, len(t))
        channels[name] = np.maximum(v, 0.0)

    pose = {}
    if config.motion is not None:
        for j, name in enumerate(("pitch", "roll", "yaw")):
            # slight per-axis phase offsets; equal magnitudes
            pose[name] = config.motion.amplitude * 50.0 * np.sin(
                2 * np.pi * config.motion.freq_hz * t + j * np.pi / 7
            )
    else:
        pose = {"pitch": None, "roll": None, "yaw": None}

    trace = SampleTrace(t=t, source_id=f"synth-{config.seed}", **channels, **pose)
    truth_beats = BeatSeries(beats, source="ground_truth")
    truth = hrv_report(filter_ibis(ibis_from_beats(truth_beats)), truth_beats)
    return SynthOutput(trace, truth_beats, truth, ibis)
