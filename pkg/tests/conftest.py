import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pulsecam.synth import SynthConfig, synth_trace


@pytest.fixture(scope="session")
def clean_72_output():
    """5-minute 30 Hz constant-rate trace at 72 bpm, no motion, no noise."""
    return synth_trace(SynthConfig(duration_s=300.0, rate_hz=30.0, mean_hr_bpm=72.0))


@pytest.fixture(scope="session")
def modulated_60_output():
    """5-minute 30 Hz trace at 60 bpm with 0.1 Hz +/- 50 ms IBI modulation."""
    return synth_trace(SynthConfig(
        duration_s=300.0, rate_hz=30.0, mean_hr_bpm=60.0,
        ibi_mod_freq_hz=0.1, ibi_mod_amp_ms=50.0,
    ))


def make_gt_csv(rate, values, kind="ppg", t0=0.0):
    """Ground-truth waveform CSV bytes for the given samples."""
    lines = [f"# rate={rate:g} kind={kind}"]
    for k, v in enumerate(values):
        lines.append(f"{t0 + k / rate!r},{float(v)!r}")
    return ("\n".join(lines) + "\n").encode()


def synthetic_ppg(rate=60.0, duration_s=60.0, hr_bpm=60.0):
    """Plain two-harmonic PPG-like waveform with crests on the beat grid."""
    t = np.arange(int(duration_s * rate) + 1) / rate
    f = hr_bpm / 60.0
    return t, np.cos(2 * np.pi * f * t) + 0.3 * np.cos(4 * np.pi * f * t)
