/** Server-authoritative session state.
 *
 * The store never mutates peaks locally: an edit is posted, and the state
 * is replaced wholesale with the server's acknowledgment. A version
 * conflict flips `needsReload` so the UI can prompt, never dropping the
 * edit silently.
 */

import { ApiClient, VersionConflictError } from "./api.js";
import { RrStripModel } from "./rr-strip.js";
import type { PeakEdit, PeaksDoc } from "./types.js";

export type SessionListener = () => void;

export class SessionStore {
  peaks: number[] = [];
  blankRegions: [number, number][] = [];
  version = 0;
  editCount = 0;
  needsReload = false;
  lastError: string | null = null;
  readonly rrStrip = new RrStripModel();
  private listeners: SessionListener[] = [];

  constructor(
    private api: ApiClient,
    readonly sessionId: string,
  ) {}

  subscribe(listener: SessionListener): void {
    this.listeners.push(listener);
  }

  private notify(): void {
    for (const l of this.listeners) l();
  }

  private accept(doc: PeaksDoc): void {
    this.peaks = doc.peaks;
    this.blankRegions = doc.blank_regions;
    this.version = doc.version;
    this.rrStrip.update(this.peaks);
    this.lastError = null;
    this.notify();
  }

  async load(): Promise<void> {
    this.accept(await this.api.peaks(this.sessionId));
    this.editCount = 0;
    this.needsReload = false;
  }

  get canUndo(): boolean {
    return this.editCount > 0 && !this.needsReload;
  }

  /** Post one edit; state updates only from the acknowledgment. */
  async applyEdit(edit: PeakEdit): Promise<boolean> {
    if (this.needsReload) {
      this.lastError = "session is stale; reload before editing";
      this.notify();
      return false;
    }
    try {
      const doc = await this.api.edit(this.sessionId, {
        edit,
        expected_version: this.version,
      });
      this.editCount += 1;
      this.accept(doc);
      return true;
    } catch (err) {
      if (err instanceof VersionConflictError) {
        this.needsReload = true;
        this.lastError = "another change landed first; reload to continue";
      } else {
        this.lastError = err instanceof Error ? err.message : String(err);
      }
      this.notify();
      return false;
    }
  }

  async undo(): Promise<boolean> {
    if (!this.canUndo) return false;
    const ok = await this.applyEdit({ kind: "undo" });
    if (ok) this.editCount -= 2; // applyEdit counted the undo itself
    return ok;
  }

  /** Nearest peak to `t` within `tol` seconds, or null. */
  nearestPeak(t: number, tol: number): number | null {
    let best: number | null = null;
    let bestDist = tol;
    for (const p of this.peaks) {
      const d = Math.abs(p - t);
      if (d <= bestDist) {
        best = p;
        bestDist = d;
      }
    }
    return best;
  }

  inBlank(t: number): boolean {
    return this.blankRegions.some(([a, b]) => t >= a && t <= b);
  }
}
