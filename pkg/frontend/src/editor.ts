/** Gesture-to-edit mapping.
 *
 * Pointer gestures become PeakEdits; nothing is sent while a gesture is in
 * flight, and the view only changes after the server acknowledges. A drag
 * below the threshold counts as a click.
 */

import { SessionStore } from "./session.js";
import type { PeakEdit } from "./types.js";
import { ViewState } from "./view.js";

export const PEAK_SNAP_PX = 8;
export const DRAG_THRESHOLD_PX = 4;

export interface Gesture {
  kind: "click" | "drag";
  fromPx: number;
  toPx: number;
}

/** Pure mapping from a finished gesture to an edit (or a selection). */
export function gestureToEdit(
  gesture: Gesture,
  view: ViewState,
  store: SessionStore,
): { edit?: PeakEdit; select?: number | null } {
  const snapTol = (PEAK_SNAP_PX / view.widthPx) * view.span;
  const fromT = view.pixelToTime(gesture.fromPx);
  const toT = view.pixelToTime(gesture.toPx);

  if (view.mode === "add" && gesture.kind === "click") {
    return { edit: { kind: "add", t: fromT } };
  }
  if (view.mode === "blank" && gesture.kind === "drag") {
    const [a, b] = fromT < toT ? [fromT, toT] : [toT, fromT];
    return { edit: { kind: "mark_blank", t: a, t2: b } };
  }
  if (view.mode === "select") {
    const grabbed = store.nearestPeak(fromT, snapTol);
    if (gesture.kind === "drag" && grabbed !== null) {
      return { edit: { kind: "move", t: grabbed, t2: toT } };
    }
    if (gesture.kind === "click") {
      return { select: grabbed };
    }
  }
  return {};
}

/** Delete key: an edit only when something is selected; otherwise nothing
 * at all is sent. */
export function deleteKeyToEdit(view: ViewState): PeakEdit | null {
  if (view.selected === null) return null;
  return { kind: "delete", t: view.selected };
}

export class GestureController {
  private downPx: number | null = null;
  private movedPx = 0;

  constructor(
    private view: ViewState,
    private store: SessionStore,
  ) {}

  pointerDown(px: number): void {
    this.downPx = px;
    this.movedPx = 0;
  }

  pointerMove(px: number): void {
    if (this.downPx !== null) {
      this.movedPx = Math.max(this.movedPx, Math.abs(px - this.downPx));
    }
  }

  /** Returns the resulting edit application promise, if any. */
  async pointerUp(px: number): Promise<boolean> {
    if (this.downPx === null) return false;
    const gesture: Gesture = {
      kind: this.movedPx >= DRAG_THRESHOLD_PX ? "drag" : "click",
      fromPx: this.downPx,
      toPx: px,
    };
    this.downPx = null;
    const action = gestureToEdit(gesture, this.view, this.store);
    if (action.select !== undefined) {
      this.view.selected = action.select;
      return false;
    }
    if (action.edit) {
      const ok = await this.store.applyEdit(action.edit);
      if (ok && action.edit.kind === "move") {
        this.view.selected = action.edit.t2 ?? null;
      }
      if (ok && action.edit.kind === "delete") {
        this.view.selected = null;
      }
      return ok;
    }
    return false;
  }

  async deleteKey(): Promise<boolean> {
    const edit = deleteKeyToEdit(this.view);
    if (!edit) return false;
    const ok = await this.store.applyEdit(edit);
    if (ok) this.view.selected = null;
    return ok;
  }
}
