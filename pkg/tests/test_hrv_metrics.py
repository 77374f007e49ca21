import math

import numpy as np
import pytest
import scipy.signal
from hypothesis import given, settings
from hypothesis import strategies as st

from pulsecam.beat_analysis import BeatSeries, IbiSeries, filter_ibis, ibis_from_beats
from pulsecam.errors import InsufficientDataError, UndefinedMetricError, ValidationError
from pulsecam.hrv_metrics import (
    Periodogram,
    detrend,
    hrv_report,
    interpolate_tachogram,
    lf_hf,
    rmssd,
    sdnn,
    welch_psd,
)
from pulsecam.trace_io import UniformSignal

from oracles import dense_detrend, rmssd_oracle


def ibis_of(durations_ms):
    d = np.asarray(durations_ms, dtype=np.float64)
    starts = np.concatenate([[0.0], np.cumsum(d[:-1]) / 1000.0])
    return IbiSeries(d, np.arange(len(d)), starts)


def beats_with_ibis(durations_ms):
    d = np.asarray(durations_ms, dtype=np.float64)
    beats = BeatSeries(np.concatenate([[0.0], np.cumsum(d) / 1000.0]))
    return beats, ibis_from_beats(beats)


class TestRmssd:
    def test_constant_is_zero(self):
        assert rmssd(ibis_of([1000.0] * 4)) == 0.0

    def test_alternating_100ms(self):
        assert rmssd(ibis_of([1000, 1100, 1000, 1100])) == pytest.approx(100.0)

    def test_matches_oracle_on_random(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            d = rng.uniform(700, 1300, 30)
            want = rmssd_oracle(d)
            if want is None:
                continue
            assert rmssd(ibis_of(d)) == pytest.approx(want, rel=1e-12)

    def test_broken_pairs_skipped(self):
        # middle interval excluded by the 1-sigma mask: its two differences
        # must not contribute
        d = np.array([1000.0, 1000, 1000, 1800, 1000, 1000, 1000, 1000, 1000, 1000])
        keep = np.abs(d - d.mean()) <= d.std()
        assert not keep[3]
        assert rmssd(ibis_of(d)) == pytest.approx(0.0)

    def test_nonadjacent_start_indices_skipped(self):
        # simulate a gap left by an earlier filter: indices 0,1,3
        series = IbiSeries(
            np.array([1000.0, 1000.0, 2000.0 * 0 + 1000.0]),
            np.array([0, 1, 3]),
            np.array([0.0, 1.0, 3.0]),
        )
        # pair (1,3) is non-adjacent; only (0,1) contributes
        assert rmssd(series) == 0.0

    def test_insufficient_data(self):
        with pytest.raises(InsufficientDataError):
            rmssd(ibis_of([1000.0, 1010.0]))


class TestSdnn:
    def test_two_points_population_sigma(self):
        assert sdnn(ibis_of([900.0, 1100.0])) == pytest.approx(100.0)

    def test_constant_zero(self):
        assert sdnn(ibis_of([840.0] * 6)) == 0.0

    def test_matches_two_pass_oracle(self):
        rng = np.random.default_rng(23)
        d = rng.uniform(600, 1400, 50)
        mean = math.fsum(d) / len(d)
        var = math.fsum((x - mean) ** 2 for x in d) / len(d)
        assert sdnn(ibis_of(d)) == pytest.approx(math.sqrt(var), rel=1e-9)

    def test_insufficient(self):
        with pytest.raises(InsufficientDataError):
            sdnn(ibis_of([1000.0]))


@given(offset=st.floats(-200, 200), scale=st.floats(0.5, 3.0))
@settings(max_examples=40, deadline=None)
def test_translation_and_scale_behavior(offset, scale):
    rng = np.random.default_rng(4)
    d = rng.uniform(800, 1200, 20)
    r0, s0 = rmssd(ibis_of(d)), sdnn(ibis_of(d))
    assert rmssd(ibis_of(d + offset)) == pytest.approx(r0, rel=1e-9, abs=1e-9)
    assert sdnn(ibis_of(d + offset)) == pytest.approx(s0, rel=1e-9, abs=1e-9)
    assert rmssd(ibis_of(d * scale)) == pytest.approx(scale * r0, rel=1e-9)
    assert sdnn(ibis_of(d * scale)) == pytest.approx(scale * s0, rel=1e-9)


class TestTachogram:
    def test_constant_ibis_constant_tachogram(self):
        beats, ibis = beats_with_ibis([1000.0] * 10)
        tacho = interpolate_tachogram(ibis, beats)
        assert tacho.rate == 4.0
        np.testing.assert_allclose(tacho.values, 1000.0, atol=1e-9)

    def test_sinusoidal_modulation_recovered(self):
        times = [0.0]
        ibis = []
        while times[-1] < 120:
            ibi = 1000 + 50 * math.sin(2 * math.pi * 0.1 * times[-1])
            ibis.append(ibi)
            times.append(times[-1] + ibi / 1000.0)
        beats = BeatSeries(np.array(times))
        tacho = interpolate_tachogram(ibis_from_beats(beats), beats)
        t = tacho.times()
        # a knot sits at the interval's END beat but carries the modulation
        # phase of its START beat, one interval (~1 s) earlier
        expected = 1000 + 50 * np.sin(2 * np.pi * 0.1 * (t - 1.0))
        corr = np.corrcoef(tacho.values, expected)[0, 1]
        assert corr >= 0.99

    def test_three_knots_insufficient(self):
        beats, ibis = beats_with_ibis([1000.0] * 3)
        with pytest.raises(InsufficientDataError):
            interpolate_tachogram(ibis, beats)

    def test_grid_spans_knots(self):
        beats, ibis = beats_with_ibis([800.0] * 8)
        tacho = interpolate_tachogram(ibis, beats)
        assert tacho.t0 == pytest.approx(0.8)
        assert tacho.times()[-1] <= beats.times[-1] + 1e-9


class TestDetrend:
    def test_constant_input_zeroed(self):
        sig = UniformSignal(0.0, 4.0, np.full(100, 950.0))
        out = detrend(sig, 500.0)
        # solver residual scales with the input magnitude; 1e-6 matches the
        # dense-oracle agreement bound
        np.testing.assert_allclose(out.values, 0.0, atol=1e-6)

    def test_linear_ramp_removed(self):
        n = 400
        ramp = np.linspace(0, 200, n)
        out = detrend(UniformSignal(0.0, 4.0, ramp), 500.0)
        dense = dense_detrend(ramp, 500.0)
        np.testing.assert_allclose(out.values, dense, atol=1e-6)
        interior = out.values[20:-20]
        assert np.max(np.abs(interior)) <= 0.01 * 200

    def test_quarter_hz_tone_preserved(self):
        t = np.arange(480) / 4.0
        tone = 40 * np.sin(2 * np.pi * 0.25 * t)
        out = detrend(UniformSignal(0.0, 4.0, tone), 500.0)
        np.testing.assert_allclose(out.values, dense_detrend(tone, 500.0), atol=1e-6)
        # amplitude preserved to >= 90% away from the edges
        interior = out.values[40:-40]
        assert np.max(np.abs(interior)) >= 0.9 * 40

    @pytest.mark.parametrize("n", [3, 10, 137, 500, 2000])
    def test_matches_dense_oracle(self, n):
        rng = np.random.default_rng(n)
        x = rng.normal(1000, 60, n)
        out = detrend(UniformSignal(0.0, 4.0, x), 500.0)
        np.testing.assert_allclose(out.values, dense_detrend(x, 500.0), atol=1e-6)

    def test_too_short_rejected(self):
        with pytest.raises(InsufficientDataError):
            detrend(UniformSignal(0.0, 4.0, np.array([1.0, 2.0])), 500.0)


class TestWelch:
    def test_white_noise_total_power_near_variance(self):
        rng = np.random.default_rng(31)
        x = rng.normal(0, 30, 4096)
        psd = welch_psd(UniformSignal(0.0, 4.0, x))
        df = psd.frequencies[1] - psd.frequencies[0]
        total = np.sum(psd.power) * df
        assert abs(total - np.var(x)) <= 0.1 * np.var(x)

    def test_matches_scipy_welch(self):
        rng = np.random.default_rng(37)
        x = rng.normal(0, 5, 2048)
        psd = welch_psd(UniformSignal(0.0, 4.0, x))
        f_ref, p_ref = scipy.signal.welch(
            x, fs=4.0, window="hann", nperseg=256, noverlap=128, detrend="constant"
        )
        np.testing.assert_allclose(psd.frequencies, f_ref)
        np.testing.assert_allclose(psd.power, p_ref, rtol=1e-9, atol=1e-12)

    def test_pure_tone_peak_bin(self):
        t = np.arange(2048) / 4.0
        x = 50 * np.sin(2 * np.pi * 0.1 * t)
        psd = welch_psd(UniformSignal(0.0, 4.0, x))
        peak = psd.frequencies[np.argmax(psd.power)]
        df = psd.frequencies[1] - psd.frequencies[0]
        assert abs(peak - 0.1) <= df

    def test_zero_input_zero_power(self):
        psd = welch_psd(UniformSignal(0.0, 4.0, np.zeros(1000)))
        np.testing.assert_array_equal(psd.power, 0.0)

    def test_short_input_single_segment(self):
        rng = np.random.default_rng(41)
        x = rng.normal(0, 1, 100)
        psd = welch_psd(UniformSignal(0.0, 4.0, x))
        assert len(psd.frequencies) == 100 // 2 + 1

    def test_empty_rejected(self):
        with pytest.raises(InsufficientDataError):
            welch_psd(UniformSignal(0.0, 4.0, np.zeros(0)))


class TestLfHf:
    def run_tone(self, freq):
        t = np.arange(1200) / 4.0
        x = 1000 + 50 * np.sin(2 * np.pi * freq * t)
        tacho = detrend(UniformSignal(0.0, 4.0, x), 500.0)
        return lf_hf(welch_psd(tacho))

    def test_lf_tone(self):
        lf, hf, ratio = self.run_tone(0.1)
        assert lf >= 0.95
        assert lf + hf == pytest.approx(1.0, abs=1e-12)
        assert ratio == pytest.approx(lf / hf)

    def test_hf_tone(self):
        lf, hf, _ = self.run_tone(0.3)
        assert hf >= 0.95

    def test_sum_is_one(self):
        rng = np.random.default_rng(43)
        psd = welch_psd(UniformSignal(0.0, 4.0, rng.normal(0, 10, 2000)))
        lf, hf, _ = lf_hf(psd)
        assert lf + hf == pytest.approx(1.0, abs=1e-12)

    def test_boundary_bin_goes_to_hf(self):
        freqs = np.arange(0, 0.5, 0.0125)
        power = np.zeros_like(freqs)
        power[np.argmin(np.abs(freqs - 0.15))] = 10.0
        lf, hf, _ = lf_hf(Periodogram(freqs, power))
        assert hf == pytest.approx(1.0)
        assert lf == 0.0

    def test_zero_band_power_undefined(self):
        freqs = np.linspace(0, 2, 257)
        with pytest.raises(UndefinedMetricError):
            lf_hf(Periodogram(freqs, np.zeros_like(freqs)))

    def test_psd_must_cover_hf(self):
        with pytest.raises(ValidationError):
            lf_hf(Periodogram(np.linspace(0, 0.2, 50), np.ones(50)))


class TestHrvReport:
    def test_constant_input_undefined_frequency_metrics(self):
        beats, ibis = beats_with_ibis([1000.0] * 300)
        report = hrv_report(filter_ibis(ibis), beats)
        assert report.rmssd_ms == 0.0
        assert report.sdnn_ms == 0.0
        assert report.lf_nu is None and report.hf_nu is None and report.lf_hf is None
        assert report.n_ibis_used == 300

    def test_modulated_input_defined(self):
        times = [0.0]
        while times[-1] < 300:
            ibi = 1.0 + 0.05 * math.sin(2 * math.pi * 0.1 * times[-1])
            times.append(times[-1] + ibi)
        beats = BeatSeries(np.array(times))
        report = hrv_report(filter_ibis(ibis_from_beats(beats)), beats)
        assert report.lf_nu is not None and report.lf_nu >= 0.9
        assert report.lf_nu + report.hf_nu == pytest.approx(1.0, abs=1e-9)
        assert report.lf_hf * report.hf_nu == pytest.approx(report.lf_nu, rel=1e-9)

    def test_too_few_intervals_all_undefined(self):
        beats, ibis = beats_with_ibis([1000.0, 1010.0])
        report = hrv_report(filter_ibis(ibis), beats)
        assert report.rmssd_ms is None
        assert report.sdnn_ms is not None  # two intervals suffice for SDNN
        assert report.lf_nu is None
