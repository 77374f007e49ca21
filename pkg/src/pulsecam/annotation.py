"""Server-side ground-truth peak cleaning: candidate proposal, editable
annotation sessions with undo, and annotation-file import/export.

Session state is server-authoritative with optimistic versioning: every edit
carries the version it was based on and bumps it by one when applied.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from .beat_analysis import BeatSeries, _scan_maxima
from .errors import EditError, ValidationError, VersionConflictError
from .trace_io import GroundTruthRecord

ANNOTATION_FORMAT_VERSION = 1

# Fraction of the waveform's standard deviation used as the proposal
# threshold; sigma-relative so one setting works for PPG and ECG amplitudes.
PROPOSAL_DELTA_SIGMA = 0.4

# An edit may grab a peak at most this far away; under half the minimum
# plausible inter-beat interval, so it can never grab the wrong beat.
SNAP_TOLERANCE_S = 0.15

EDIT_KINDS = ("add", "move", "delete", "mark_blank", "unmark_blank", "undo")


@dataclass(frozen=True)
class PeakEdit:
    kind: str
    t: float | None = None
    t2: float | None = None  # move target / blank region end

    def __post_init__(self):
        if self.kind not in EDIT_KINDS:
            raise ValidationError(f"unknown edit kind {self.kind!r}")
        needs_t = self.kind in ("add", "move", "delete", "mark_blank", "unmark_blank")
        if needs_t and self.t is None:
            raise ValidationError(f"edit {self.kind} requires a time")
        if self.kind in ("move", "mark_blank", "unmark_blank") and self.t2 is None:
            raise ValidationError(f"edit {self.kind} requires a second time")
        if self.kind in ("mark_blank", "unmark_blank") and self.t2 <= self.t:
            raise ValidationError("blank region must have t2 > t")

    def as_dict(self) -> dict:
        return {"kind": self.kind, "t": self.t, "t2": self.t2}

    @staticmethod
    def from_dict(d: dict) -> "PeakEdit":
        return PeakEdit(d["kind"], d.get("t"), d.get("t2"))


def propose_peaks(waveform: GroundTruthRecord, delta: float | None = None) -> BeatSeries:
    """Candidate peaks via the alternating-scan crest detector.

    Default threshold is 0.4 sigma of the whole waveform; a flat waveform
    yields an empty proposal.
    """
    values = waveform.waveform.values
    if len(values) == 0:
        raise ValidationError("empty waveform")
    if delta is None:
        sigma = float(np.std(values))
        if sigma == 0.0:
            return BeatSeries(np.zeros(0), source="ground_truth")
        delta = PROPOSAL_DELTA_SIGMA * sigma
    idx = _scan_maxima(values, delta)
    times = waveform.waveform.t0 + np.asarray(idx, dtype=np.float64) / waveform.waveform.rate
    return BeatSeries(times, source="ground_truth")


class AnnotationSession:
    """One editable peak set over one waveform; single logical writer."""

    def __init__(
        self,
        session_id: str,
        waveform: GroundTruthRecord,
        peaks: BeatSeries | None = None,
        annotator: str = "",
    ):
        self.session_id = session_id
        self.waveform = waveform
        if peaks is None:
            peaks = propose_peaks(waveform)
        self.initial_peaks: list[float] = [float(t) for t in peaks.times]
        self.peaks: list[float] = list(self.initial_peaks)
        self.blank_regions: list[tuple[float, float]] = []
        self.edit_log: list[dict] = []
        self.version = 0
        self.annotator = annotator
        self.dirty = False

    # -- queries ----------------------------------------------------------

    def beat_series(self) -> BeatSeries:
        return BeatSeries(np.array(self.peaks), source="ground_truth")

    def rr_intervals(self) -> list[dict]:
        """(beat time, RR ms) points for the overview strip."""
        return [
            {"t": self.peaks[i + 1], "rr_ms": (self.peaks[i + 1] - self.peaks[i]) * 1000.0}
            for i in range(len(self.peaks) - 1)
        ]

    def _find_snapped(self, t: float) -> int:
        if not self.peaks:
            raise EditError(f"no peak within {SNAP_TOLERANCE_S} s of t={t}")
        arr = np.asarray(self.peaks)
        i = int(np.argmin(np.abs(arr - t)))
        if abs(arr[i] - t) > SNAP_TOLERANCE_S:
            raise EditError(f"no peak within {SNAP_TOLERANCE_S} s of t={t}")
        return i

    def _in_blank(self, t: float) -> bool:
        return any(t0 <= t <= t1 for t0, t1 in self.blank_regions)

    # -- edits ------------------------------------------------------------

    def apply_edit(self, edit: PeakEdit, expected_version: int | None = None):
        """Apply one edit; raises VersionConflictError on a stale version."""
        if expected_version is not None and expected_version != self.version:
            raise VersionConflictError(
                f"session at version {self.version}, edit based on {expected_version}"
            )
        record = {"edit": edit.as_dict()}
        if edit.kind == "add":
            self._apply_add(edit.t)
        elif edit.kind == "delete":
            i = self._find_snapped(edit.t)
            record["removed"] = [self.peaks[i]]
            del self.peaks[i]
        elif edit.kind == "move":
            i = self._find_snapped(edit.t)
            if self._in_blank(edit.t2):
                raise EditError("cannot move a peak into a blank region")
            record["moved_from"] = self.peaks[i]
            del self.peaks[i]
            self._insert_peak(edit.t2)
        elif edit.kind == "mark_blank":
            record["prev_blanks"] = list(self.blank_regions)
            record["removed"] = [p for p in self.peaks if edit.t <= p <= edit.t2]
            self.peaks = [p for p in self.peaks if not edit.t <= p <= edit.t2]
            self._merge_blank(edit.t, edit.t2)
        elif edit.kind == "unmark_blank":
            record["prev_blanks"] = list(self.blank_regions)
            self._unmark_blank(edit.t, edit.t2)
        elif edit.kind == "undo":
            record.update(self._undo())
        self.edit_log.append(record)
        self.version += 1
        self.dirty = True

    def _apply_add(self, t: float):
        if self._in_blank(t):
            raise EditError(f"t={t} lies inside a blank region")
        if any(abs(p - t) < 1e-12 for p in self.peaks):
            raise EditError(f"peak already exists at t={t}")
        self._insert_peak(t)

    def _insert_peak(self, t: float):
        self.peaks.append(float(t))
        self.peaks.sort()

    def _merge_blank(self, t0: float, t1: float):
        merged = [(t0, t1)]
        for a, b in self.blank_regions:
            m0, m1 = merged[-1]
            if a <= m1 and b >= m0:  # overlap -> merge
                merged[-1] = (min(a, m0), max(b, m1))
            else:
                merged.append((a, b))
        self.blank_regions = sorted(merged)

    def _unmark_blank(self, t0: float, t1: float):
        out = []
        for a, b in self.blank_regions:
            if b <= t0 or a >= t1:
                out.append((a, b))
                continue
            if a < t0:
                out.append((a, t0))
            if b > t1:
                out.append((t1, b))
        self.blank_regions = sorted(out)

    def _undo(self) -> dict:
        """Revert the most recent not-yet-undone edit; returns its record."""
        undone_indices = {
            r["undone_index"] for r in self.edit_log if r["edit"]["kind"] == "undo"
        }
        target = None
        for i in range(len(self.edit_log) - 1, -1, -1):
            if i not in undone_indices and self.edit_log[i]["edit"]["kind"] != "undo":
                target = i
                break
        if target is None:
            raise EditError("nothing to undo")
        rec = self.edit_log[target]
        kind = rec["edit"]["kind"]
        if kind == "add":
            self.peaks.remove(rec["edit"]["t"])
        elif kind == "delete":
            for p in rec["removed"]:
                self._insert_peak(p)
        elif kind == "move":
            self.peaks.remove(rec["edit"]["t2"])
            self._insert_peak(rec["moved_from"])
        elif kind in ("mark_blank", "unmark_blank"):
            self.blank_regions = [tuple(r) for r in rec["prev_blanks"]]
            for p in rec.get("removed", []):
                self._insert_peak(p)
        return {"undone_index": target}

    def apply_edit_record(self, record: dict):
        """Replay one stored log record (used for restore and audits)."""
        saved_log = self.edit_log
        edit = PeakEdit.from_dict(record["edit"])
        self.apply_edit(edit)
        # keep the original record so undone_index bookkeeping matches
        saved_log[-1] = dict(record)
        self.edit_log = saved_log

    # -- persistence ------------------------------------------------------

    def export_annotations(self, created_at: str | None = None) -> bytes:
        doc = {
            "version": ANNOTATION_FORMAT_VERSION,
            "signal_id": self.session_id,
            "kind": self.waveform.kind,
            "peaks": self.peaks,
            "blank_regions": [list(r) for r in self.blank_regions],
            "annotator": self.annotator,
            "created_at": created_at or time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        }
        return (json.dumps(doc, indent=1) + "\n").encode("utf-8")

    def state_dict(self) -> dict:
        """Full session state including the edit log (for the session store)."""
        return {
            "session_id": self.session_id,
            "kind": self.waveform.kind,
            "initial_peaks": self.initial_peaks,
            "peaks": self.peaks,
            "blank_regions": [list(r) for r in self.blank_regions],
            "edit_log": self.edit_log,
            "version": self.version,
            "annotator": self.annotator,
        }

    @staticmethod
    def restore(state: dict, waveform: GroundTruthRecord) -> "AnnotationSession":
        s = AnnotationSession(
            state["session_id"], waveform,
            peaks=BeatSeries(np.array(state["initial_peaks"]), source="ground_truth"),
            annotator=state.get("annotator", ""),
        )
        s.peaks = [float(p) for p in state["peaks"]]
        s.blank_regions = [tuple(r) for r in state["blank_regions"]]
        s.edit_log = list(state["edit_log"])
        s.version = int(state["version"])
        return s

    def replay(self) -> list[float]:
        """Recompute the peak set by replaying the edit log from the proposal."""
        fresh = AnnotationSession(
            self.session_id, self.waveform,
            peaks=BeatSeries(np.array(self.initial_peaks), source="ground_truth"),
            annotator=self.annotator,
        )
        for record in self.edit_log:
            fresh.apply_edit_record(record)
        return fresh.peaks


@dataclass(frozen=True)
class ImportedAnnotations:
    signal_id: str
    kind: str
    peaks: np.ndarray
    blank_regions: tuple[tuple[float, float], ...]
    annotator: str


def import_annotations(data: bytes | str) -> ImportedAnnotations:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"bad annotation file: {e}") from None
    if doc.get("version") != ANNOTATION_FORMAT_VERSION:
        raise ValidationError(f"unsupported annotation version {doc.get('version')!r}")
    peaks = np.asarray(doc["peaks"], dtype=np.float64)
    if len(peaks) >= 2 and not np.all(np.diff(peaks) > 0):
        raise ValidationError("peaks must be strictly increasing")
    return ImportedAnnotations(
        doc["signal_id"],
        doc["kind"],
        peaks,
        tuple((float(a), float(b)) for a, b in doc["blank_regions"]),
        doc.get("annotator", ""),
    )
