/**
 * Page wiring: grayscale base + overlay canvases, candidate strip,
 * before/after toggle, and undo button, all driven by a ViewState.
 */

import { SessionClient } from "./api.js";
import { renderOverlay } from "./overlay.js";
import { buildStrip } from "./strip.js";
import { ViewState } from "./state.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function drawImage(canvas: HTMLCanvasElement, blob: Blob): Promise<void> {
  const bitmap = await createImageBitmap(blob);
  canvas.width = bitmap.width;
  canvas.height = bitmap.height;
  canvas.getContext("2d")!.drawImage(bitmap, 0, 0);
}

function drawOverlay(canvas: HTMLCanvasElement, state: ViewState): void {
  if (!state.segments) return;
  const { width, height } = state.segments;
  canvas.width = width;
  canvas.height = height;
  const buf = renderOverlay(
    state.segments,
    state.hoveredSegment,
    state.selectedSegment
  );
  canvas.getContext("2d")!.putImageData(new ImageData(buf, width, height), 0, 0);
}

function renderStrip(container: HTMLElement, state: ViewState): void {
  container.replaceChildren();
  if (!state.summary || state.selectedSegment < 0) return;
  const j = state.selectedSegment;
  const tiles = buildStrip(
    state.summary.candidates,
    state.currentChoice(j),
    (cid) => state.client.thumbUrl(state.sessionId, cid)
  );
  for (const tile of tiles) {
    const img = document.createElement("img");
    img.className = tile.isCurrent ? "tile current" : "tile";
    img.src = tile.thumbUrl;
    img.title = tile.cid;
    img.onerror = () => img.classList.add("broken");
    img.onclick = () => void state.applySwap(j, tile.cid);
    container.appendChild(img);
  }
}

export async function boot(baseUrl: string, sessionId: string): Promise<void> {
  const client = new SessionClient(baseUrl);
  const state = new ViewState(client);

  const base = el<HTMLCanvasElement>("base");
  const overlay = el<HTMLCanvasElement>("overlay");
  const strip = el<HTMLElement>("strip");
  const banner = el<HTMLElement>("banner");
  const revisionLabel = el<HTMLElement>("revision");
  const undoButton = el<HTMLButtonElement>("undo");
  const beforeButton = el<HTMLButtonElement>("before");

  overlay.addEventListener("mousemove", (ev) => {
    const rect = overlay.getBoundingClientRect();
    state.hover(
      Math.floor(ev.clientX - rect.left),
      Math.floor(ev.clientY - rect.top)
    );
  });
  overlay.addEventListener("click", (ev) => {
    const rect = overlay.getBoundingClientRect();
    state.select(
      Math.floor(ev.clientX - rect.left),
      Math.floor(ev.clientY - rect.top)
    );
  });
  undoButton.onclick = () => void state.applyUndo();
  beforeButton.onclick = () => state.toggleBefore();

  let shownRevision = -1;
  let shownBefore: boolean | null = null;
  state.subscribe((s) => {
    banner.textContent = s.errorBanner ?? "";
    banner.hidden = !s.errorBanner;
    revisionLabel.textContent = `revision ${s.displayedRevision}`;
    undoButton.disabled = !s.canUndo;
    drawOverlay(overlay, s);
    renderStrip(strip, s);
    // Display-layer swap only: before/after never refetches a revision it
    // has already shown.
    if (
      !s.inFlight &&
      (s.displayedRevision !== shownRevision || s.showBefore !== shownBefore)
    ) {
      shownRevision = s.displayedRevision;
      shownBefore = s.showBefore;
      const fetchImage = s.showBefore
        ? client.fetchResult(s.sessionId, 0)
        : client.fetchResult(s.sessionId, s.displayedRevision);
      void fetchImage.then((blob) => drawImage(base, blob));
    }
  });

  await state.load(sessionId);
}
