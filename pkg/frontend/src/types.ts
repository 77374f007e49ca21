/** Wire types for the annotation server's JSON API. */

export type EditKind = "add" | "move" | "delete" | "mark_blank" | "unmark_blank" | "undo";

export interface PeakEdit {
  kind: EditKind;
  t?: number;
  t2?: number;
}

export interface SessionInfo {
  id: string;
  version: number;
  n_peaks: number;
  kind: "ppg" | "ecg";
  t0: number;
  duration_s: number;
  rate_hz: number;
}

export interface PeaksDoc {
  version: number;
  peaks: number[];
  blank_regions: [number, number][];
}

export interface RrPoint {
  t: number;
  rr_ms: number;
}

export interface RrDoc {
  version: number;
  rr: RrPoint[];
}

export interface SignalDoc {
  rate_hz: number;
  /** [t, v] pairs, min/max decimated server-side. */
  points: [number, number][];
}

export interface EditRequest {
  edit: PeakEdit;
  expected_version: number;
}
