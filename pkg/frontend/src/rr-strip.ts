/** RR-interval overview strip: one point per consecutive peak pair.
 *
 * Derived from the acknowledged peak set with the same rule the server
 * uses for GET /rr, so the strip and the server can be compared verbatim.
 */

import type { RrPoint } from "./types.js";

export function rrFromPeaks(peaks: number[]): RrPoint[] {
  const out: RrPoint[] = [];
  for (let i = 1; i < peaks.length; i++) {
    out.push({ t: peaks[i], rr_ms: (peaks[i] - peaks[i - 1]) * 1000.0 });
  }
  return out;
}

export function rrEquals(a: RrPoint[], b: RrPoint[], tolMs = 1e-9): boolean {
  if (a.length !== b.length) return false;
  for (let i = 0; i < a.length; i++) {
    if (Math.abs(a[i].t - b[i].t) > tolMs / 1000 || Math.abs(a[i].rr_ms - b[i].rr_ms) > tolMs) {
      return false;
    }
  }
  return true;
}

export class RrStripModel {
  points: RrPoint[] = [];

  /** Recompute after every acknowledged edit. */
  update(peaks: number[]): void {
    this.points = rrFromPeaks(peaks);
  }

  /** Vertical scale for rendering: [min, max] RR with a small margin. */
  range(): [number, number] {
    if (this.points.length === 0) return [0, 1000];
    let lo = Infinity;
    let hi = -Infinity;
    for (const p of this.points) {
      lo = Math.min(lo, p.rr_ms);
      hi = Math.max(hi, p.rr_ms);
    }
    const pad = Math.max(20, (hi - lo) * 0.1);
    return [lo - pad, hi + pad];
  }

  draw(ctx: CanvasRenderingContext2D, timeToPixel: (t: number) => number, heightPx: number): void {
    const [lo, hi] = this.range();
    ctx.strokeStyle = "#2a7";
    ctx.beginPath();
    this.points.forEach((p, i) => {
      const x = timeToPixel(p.t);
      const y = heightPx - ((p.rr_ms - lo) / (hi - lo)) * heightPx;
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }
}
