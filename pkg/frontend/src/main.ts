/** Bootstrap: wire the canvases, toolbar, and keyboard to the stores. */

import { ApiClient } from "./api.js";
import { GestureController } from "./editor.js";
import { SessionStore } from "./session.js";
import { ViewState, type EditMode } from "./view.js";
import { WaveformView } from "./waveform.js";

async function boot(): Promise<void> {
  const api = new ApiClient("");
  const { sessions } = await api.sessions();
  if (sessions.length === 0) {
    document.body.textContent = "no sessions on the server";
    return;
  }
  const picker = document.getElementById("session") as HTMLSelectElement;
  for (const s of sessions) {
    const opt = document.createElement("option");
    opt.value = s.id;
    opt.textContent = `${s.id} (${s.kind}, ${s.duration_s.toFixed(0)} s)`;
    picker.appendChild(opt);
  }

  const waveCanvas = document.getElementById("waveform") as HTMLCanvasElement;
  const rrCanvas = document.getElementById("rr-strip") as HTMLCanvasElement;
  const status = document.getElementById("status") as HTMLElement;

  let current: { store: SessionStore; view: ViewState; wave: WaveformView } | null = null;

  async function openSession(id: string): Promise<void> {
    const info = sessions.find((s) => s.id === id)!;
    const view = new ViewState(
      { t0: info.t0, t1: info.t0 + info.duration_s },
      waveCanvas.width,
    );
    const store = new SessionStore(api, id);
    const wave = new WaveformView(api, store, view);
    current = { store, view, wave };
    store.subscribe(render);
    await store.load();
    await wave.refresh();
    render();
  }

  function render(): void {
    if (!current) return;
    const { store, view, wave } = current;
    wave.draw(waveCanvas.getContext("2d")!, waveCanvas.height);
    const rrCtx = rrCanvas.getContext("2d")!;
    rrCtx.clearRect(0, 0, rrCanvas.width, rrCanvas.height);
    store.rrStrip.draw(rrCtx, (t) => view.timeToPixel(t), rrCanvas.height);
    (document.getElementById("undo") as HTMLButtonElement).disabled = !store.canUndo;
    status.textContent = store.needsReload
      ? "⚠ session changed elsewhere - reload to continue"
      : store.lastError ?? `${store.peaks.length} peaks, v${store.version}, mode: ${view.mode}`;
  }

  async function refreshView(): Promise<void> {
    if (!current) return;
    if (current.wave.needsRefetch()) await current.wave.refresh();
    render();
  }

  picker.addEventListener("change", () => void openSession(picker.value));

  for (const mode of ["select", "add", "blank"] as EditMode[]) {
    document.getElementById(`mode-${mode}`)!.addEventListener("click", () => {
      if (current) {
        current.view.mode = mode;
        render();
      }
    });
  }

  document.getElementById("undo")!.addEventListener("click", () => {
    void current?.store.undo();
  });
  document.getElementById("reload")!.addEventListener("click", () => {
    if (current) {
      void current.store.load().then(refreshView);
    }
  });

  let controller: GestureController | null = null;
  waveCanvas.addEventListener("pointerdown", (e) => {
    if (!current) return;
    controller = new GestureController(current.view, current.store);
    controller.pointerDown(e.offsetX);
  });
  waveCanvas.addEventListener("pointermove", (e) => controller?.pointerMove(e.offsetX));
  waveCanvas.addEventListener("pointerup", (e) => {
    void controller?.pointerUp(e.offsetX).then(render);
    controller = null;
  });
  waveCanvas.addEventListener("wheel", (e) => {
    if (!current) return;
    e.preventDefault();
    current.view.zoomAt(e.offsetX, e.deltaY < 0 ? 1.25 : 0.8);
    void refreshView();
  });
  window.addEventListener("keydown", (e) => {
    if (!current) return;
    if (e.key === "Delete" || e.key === "Backspace") {
      void new GestureController(current.view, current.store).deleteKey().then(render);
    } else if (e.key === "ArrowLeft") {
      current.view.panByPixels(-50);
      void refreshView();
    } else if (e.key === "ArrowRight") {
      current.view.panByPixels(50);
      void refreshView();
    }
  });

  await openSession(sessions[0].id);
}

boot().catch((err) => {
  document.body.textContent = `failed to reach the annotation server: ${err}`;
});
