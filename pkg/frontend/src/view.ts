/** Viewport state: the visible time range and its pixel mapping.
 *
 * The mapping is the single source of truth for all coordinate math; both
 * directions live here so they cannot drift apart.
 */

export type EditMode = "select" | "add" | "blank";

export interface ViewBounds {
  t0: number;
  t1: number;
}

const MIN_SPAN_S = 0.05;

export class ViewState {
  tFrom: number;
  tTo: number;
  widthPx: number;
  mode: EditMode = "select";
  /** Time of the selected peak, or null. Selections are by value, not
   * index: the server response after an edit may reorder indices. */
  selected: number | null = null;
  version = 0;

  constructor(private bounds: ViewBounds, widthPx: number) {
    this.tFrom = bounds.t0;
    this.tTo = bounds.t1;
    this.widthPx = widthPx;
    this.assertValid();
  }

  private assertValid(): void {
    if (!(this.tFrom < this.tTo)) {
      throw new Error(`invalid view range [${this.tFrom}, ${this.tTo}]`);
    }
  }

  get span(): number {
    return this.tTo - this.tFrom;
  }

  timeToPixel(t: number): number {
    return ((t - this.tFrom) / this.span) * this.widthPx;
  }

  pixelToTime(px: number): number {
    return this.tFrom + (px / this.widthPx) * this.span;
  }

  visible(t: number): boolean {
    return t >= this.tFrom && t <= this.tTo;
  }

  /** Zoom by `factor` (>1 zooms in) keeping the time under `anchorPx` fixed. */
  zoomAt(anchorPx: number, factor: number): void {
    const anchorT = this.pixelToTime(anchorPx);
    let span = this.span / factor;
    span = Math.max(MIN_SPAN_S, Math.min(span, this.bounds.t1 - this.bounds.t0));
    let tFrom = anchorT - (anchorPx / this.widthPx) * span;
    tFrom = Math.max(this.bounds.t0, Math.min(tFrom, this.bounds.t1 - span));
    this.tFrom = tFrom;
    this.tTo = tFrom + span;
    this.assertValid();
  }

  /** Pan the view by a pixel delta (positive drags content left). */
  panByPixels(dxPx: number): void {
    const dt = (dxPx / this.widthPx) * this.span;
    const span = this.span;
    let tFrom = this.tFrom + dt;
    tFrom = Math.max(this.bounds.t0, Math.min(tFrom, this.bounds.t1 - span));
    this.tFrom = tFrom;
    this.tTo = tFrom + span;
    this.assertValid();
  }

  resize(widthPx: number): void {
    this.widthPx = widthPx;
  }
}
