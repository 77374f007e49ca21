import numpy as np
import pytest

from pulsecam.annotation import (
    AnnotationSession,
    PeakEdit,
    import_annotations,
    propose_peaks,
)
from pulsecam.beat_analysis import BeatSeries
from pulsecam.errors import EditError, ValidationError, VersionConflictError
from pulsecam.trace_io import GroundTruthRecord, UniformSignal

from conftest import synthetic_ppg
from oracles import peakdet_oracle


def record_of(values, rate=1.0, kind="ppg"):
    return GroundTruthRecord(UniformSignal(0.0, rate, np.asarray(values, float)), kind)


def empty_session():
    t, wave = synthetic_ppg(rate=60.0, duration_s=60.0)
    session = AnnotationSession("s1", record_of(wave, rate=60.0),
                                peaks=BeatSeries(np.zeros(0)))
    return session


class TestProposePeaks:
    def test_fixed_delta_matches_detector(self):
        beats = propose_peaks(record_of([0, 1, 0, 0.5, 0, 2, 0]), delta=0.8)
        np.testing.assert_array_equal(beats.times, [1.0, 5.0])
        want, _ = peakdet_oracle([0, 1, 0, 0.5, 0, 2, 0], 0.8)
        np.testing.assert_array_equal(beats.times, np.asarray(want, float))

    def test_flat_line_empty(self):
        assert len(propose_peaks(record_of(np.full(100, 3.0)))) == 0

    def test_clean_ppg_count(self):
        t, wave = synthetic_ppg(rate=60.0, duration_s=60.0, hr_bpm=60.0)
        beats = propose_peaks(record_of(wave, rate=60.0))
        assert abs(len(beats) - 60) <= 1

    def test_deterministic(self):
        t, wave = synthetic_ppg()
        a = propose_peaks(record_of(wave, rate=60.0))
        b = propose_peaks(record_of(wave, rate=60.0))
        np.testing.assert_array_equal(a.times, b.times)


class TestEdits:
    def test_add_to_empty(self):
        s = empty_session()
        s.apply_edit(PeakEdit("add", t=12.0))
        assert s.peaks == [12.0]
        assert s.version == 1

    def test_delete_snaps(self):
        s = empty_session()
        s.apply_edit(PeakEdit("add", t=12.0))
        s.apply_edit(PeakEdit("delete", t=12.05))
        assert s.peaks == []

    def test_delete_beyond_snap_tolerance_fails(self):
        s = empty_session()
        s.apply_edit(PeakEdit("add", t=12.0))
        with pytest.raises(EditError, match="no peak within"):
            s.apply_edit(PeakEdit("delete", t=12.3))

    def test_move(self):
        s = empty_session()
        s.apply_edit(PeakEdit("add", t=10.0))
        s.apply_edit(PeakEdit("move", t=10.1, t2=10.4))
        assert s.peaks == [10.4]

    def test_add_inside_blank_rejected(self):
        s = empty_session()
        s.apply_edit(PeakEdit("mark_blank", t=5.0, t2=8.0))
        with pytest.raises(EditError, match="blank"):
            s.apply_edit(PeakEdit("add", t=6.0))

    def test_blank_deletes_covered_peaks(self):
        s = empty_session()
        for t in (1.0, 2.0, 3.0, 9.0):
            s.apply_edit(PeakEdit("add", t=t))
        s.apply_edit(PeakEdit("mark_blank", t=1.5, t2=3.5))
        assert s.peaks == [1.0, 9.0]
        assert s.blank_regions == [(1.5, 3.5)]

    def test_overlapping_blanks_merge(self):
        s = empty_session()
        s.apply_edit(PeakEdit("mark_blank", t=1.0, t2=3.0))
        s.apply_edit(PeakEdit("mark_blank", t=2.0, t2=5.0))
        assert s.blank_regions == [(1.0, 5.0)]

    def test_unmark_blank_splits(self):
        s = empty_session()
        s.apply_edit(PeakEdit("mark_blank", t=1.0, t2=5.0))
        s.apply_edit(PeakEdit("unmark_blank", t=2.0, t2=3.0))
        assert s.blank_regions == [(1.0, 2.0), (3.0, 5.0)]

    def test_version_conflict(self):
        s = empty_session()
        s.apply_edit(PeakEdit("add", t=1.0), expected_version=0)
        with pytest.raises(VersionConflictError):
            s.apply_edit(PeakEdit("add", t=2.0), expected_version=0)

    def test_peaks_remain_increasing_and_outside_blanks(self):
        rng = np.random.default_rng(13)
        s = empty_session()
        times = sorted(rng.uniform(0, 59, 30).tolist())
        for t in times:
            s.apply_edit(PeakEdit("add", t=t))
        s.apply_edit(PeakEdit("mark_blank", t=10.0, t2=20.0))
        s.apply_edit(PeakEdit("mark_blank", t=40.0, t2=45.0))
        arr = np.array(s.peaks)
        assert np.all(np.diff(arr) > 0)
        for t0, t1 in s.blank_regions:
            assert not np.any((arr >= t0) & (arr <= t1))


class TestUndo:
    def test_undo_add(self):
        s = empty_session()
        s.apply_edit(PeakEdit("add", t=1.0))
        s.apply_edit(PeakEdit("add", t=2.0))
        s.apply_edit(PeakEdit("undo"))
        assert s.peaks == [1.0]
        assert len(s.edit_log) == 3

    def test_undo_delete_restores(self):
        s = empty_session()
        s.apply_edit(PeakEdit("add", t=1.0))
        s.apply_edit(PeakEdit("delete", t=1.0))
        n_log = len(s.edit_log)
        s.apply_edit(PeakEdit("undo"))
        assert s.peaks == [1.0]
        assert len(s.edit_log) == n_log + 1

    def test_undo_blank_restores_covered_peaks(self):
        s = empty_session()
        for t in (1.0, 2.0, 3.0):
            s.apply_edit(PeakEdit("add", t=t))
        s.apply_edit(PeakEdit("mark_blank", t=0.5, t2=2.5))
        assert s.peaks == [3.0]
        s.apply_edit(PeakEdit("undo"))
        assert s.peaks == [1.0, 2.0, 3.0]
        assert s.blank_regions == []

    def test_double_undo_reverts_in_reverse_order(self):
        s = empty_session()
        s.apply_edit(PeakEdit("add", t=1.0))
        s.apply_edit(PeakEdit("move", t=1.0, t2=1.5))
        s.apply_edit(PeakEdit("undo"))
        assert s.peaks == [1.0]
        s.apply_edit(PeakEdit("undo"))
        assert s.peaks == []

    def test_undo_empty_log_errors(self):
        s = empty_session()
        with pytest.raises(EditError, match="nothing to undo"):
            s.apply_edit(PeakEdit("undo"))

    def test_undo_move(self):
        s = empty_session()
        s.apply_edit(PeakEdit("add", t=5.0))
        s.apply_edit(PeakEdit("move", t=5.0, t2=5.3))
        s.apply_edit(PeakEdit("undo"))
        assert s.peaks == [5.0]


class TestReplay:
    def test_replay_reproduces_state(self):
        rng = np.random.default_rng(21)
        t, wave = synthetic_ppg(rate=60.0, duration_s=60.0)
        s = AnnotationSession("r1", record_of(wave, rate=60.0))
        for _ in range(40):
            kind = rng.choice(["add", "delete", "move", "mark_blank", "undo"])
            try:
                if kind == "add":
                    s.apply_edit(PeakEdit("add", t=float(rng.uniform(0, 59))))
                elif kind == "delete" and s.peaks:
                    s.apply_edit(PeakEdit("delete", t=float(rng.choice(s.peaks))))
                elif kind == "move" and s.peaks:
                    target = float(rng.choice(s.peaks))
                    s.apply_edit(PeakEdit("move", t=target,
                                          t2=float(rng.uniform(0, 59))))
                elif kind == "mark_blank":
                    a = float(rng.uniform(0, 55))
                    s.apply_edit(PeakEdit("mark_blank", t=a, t2=a + rng.uniform(0.5, 3)))
                elif kind == "undo" and s.edit_log:
                    s.apply_edit(PeakEdit("undo"))
            except EditError:
                continue
        assert s.replay() == s.peaks


class TestExportImport:
    def test_roundtrip(self):
        s = empty_session()
        s.apply_edit(PeakEdit("add", t=1.0))
        s.apply_edit(PeakEdit("add", t=2.0))
        s.apply_edit(PeakEdit("mark_blank", t=10.0, t2=20.0))
        doc = import_annotations(s.export_annotations())
        np.testing.assert_array_equal(doc.peaks, [1.0, 2.0])
        assert doc.blank_regions == ((10.0, 20.0),)
        assert doc.kind == "ppg"

    def test_empty_session_valid_file(self):
        doc = import_annotations(empty_session().export_annotations())
        assert len(doc.peaks) == 0
        assert doc.blank_regions == ()

    def test_bulk_roundtrip_full_precision(self):
        rng = np.random.default_rng(29)
        times = np.sort(rng.uniform(0, 1e4, 10_000))
        times = times[np.concatenate([[True], np.diff(times) > 0])]
        t, wave = synthetic_ppg()
        s = AnnotationSession("bulk", record_of(wave, rate=60.0),
                              peaks=BeatSeries(times))
        doc = import_annotations(s.export_annotations())
        np.testing.assert_array_equal(doc.peaks, times)

    def test_unsorted_peaks_rejected_on_import(self):
        with pytest.raises(ValidationError):
            import_annotations(
                b'{"version": 1, "signal_id": "x", "kind": "ppg",'
                b' "peaks": [2.0, 1.0], "blank_regions": []}'
            )

    def test_wrong_version_rejected(self):
        with pytest.raises(ValidationError, match="version"):
            import_annotations(b'{"version": 99, "peaks": []}')
