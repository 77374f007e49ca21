/** Waveform canvas: decimated signal, peak markers, blank-region shading.
 *
 * The server decimates (min/max buckets); this view only decides how many
 * points to ask for: twice the canvas width, so every pixel column can
 * carry its bucket's min and max.
 */

import { ApiClient } from "./api.js";
import { SessionStore } from "./session.js";
import type { SignalDoc } from "./types.js";
import { ViewState } from "./view.js";

export function maxPointsForViewport(widthPx: number): number {
  return Math.max(64, 2 * Math.round(widthPx));
}

export class WaveformView {
  private signal: SignalDoc | null = null;
  private fetchedRange: [number, number] | null = null;
  lastError: string | null = null;

  constructor(
    private api: ApiClient,
    private store: SessionStore,
    private view: ViewState,
  ) {}

  /** Fetch samples for the current range, sized to the viewport. */
  async refresh(): Promise<void> {
    try {
      this.signal = await this.api.signal(
        this.store.sessionId,
        this.view.tFrom,
        this.view.tTo,
        maxPointsForViewport(this.view.widthPx),
      );
      this.fetchedRange = [this.view.tFrom, this.view.tTo];
      this.lastError = null;
    } catch (err) {
      // visible error state; the caller decides when to retry (no loop)
      this.lastError = err instanceof Error ? err.message : String(err);
    }
  }

  needsRefetch(): boolean {
    if (!this.fetchedRange) return true;
    const [a, b] = this.fetchedRange;
    return Math.abs(a - this.view.tFrom) > 1e-12 || Math.abs(b - this.view.tTo) > 1e-12;
  }

  draw(ctx: CanvasRenderingContext2D, heightPx: number): void {
    ctx.clearRect(0, 0, this.view.widthPx, heightPx);
    if (this.lastError) {
      ctx.fillStyle = "#b00";
      ctx.fillText(`server unreachable: ${this.lastError}`, 12, 20);
      return;
    }
    if (!this.signal) return;

    for (const [a, b] of this.store.blankRegions) {
      const x0 = this.view.timeToPixel(a);
      const x1 = this.view.timeToPixel(b);
      ctx.fillStyle = "rgba(128,128,128,0.25)";
      ctx.fillRect(x0, 0, x1 - x0, heightPx);
    }

    const points = this.signal.points;
    if (points.length > 1) {
      let lo = Infinity;
      let hi = -Infinity;
      for (const [, v] of points) {
        lo = Math.min(lo, v);
        hi = Math.max(hi, v);
      }
      const spanV = hi - lo || 1;
      ctx.strokeStyle = "#246";
      ctx.beginPath();
      points.forEach(([t, v], i) => {
        const x = this.view.timeToPixel(t);
        const y = heightPx - ((v - lo) / spanV) * (heightPx - 8) - 4;
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      });
      ctx.stroke();
    }

    for (const p of this.store.peaks) {
      if (!this.view.visible(p)) continue;
      const x = this.view.timeToPixel(p);
      ctx.strokeStyle = p === this.view.selected ? "#d40" : "#0a2";
      ctx.beginPath();
      ctx.moveTo(x, 0);
      ctx.lineTo(x, heightPx);
      ctx.stroke();
    }
  }
}
