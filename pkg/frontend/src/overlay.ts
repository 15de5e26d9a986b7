// Overlay geometry: pure linear scaling from normalized to display
// coordinates, so boxes can be recomputed on any viewport resize.

import type { WireBox } from "./types.js";

export interface DisplayRect {
  label: string;
  score: number;
  left: number;
  top: number;
  width: number;
  height: number;
}

export function scaleBox(
  box: WireBox,
  displayW: number,
  displayH: number,
): DisplayRect {
  return {
    label: box.label,
    score: box.score,
    left: box.x0 * displayW,
    top: box.y0 * displayH,
    width: (box.x1 - box.x0) * displayW,
    height: (box.y1 - box.y0) * displayH,
  };
}

export function drawOverlays(
  boxes: WireBox[],
  displayW: number,
  displayH: number,
): DisplayRect[] {
  return boxes.map((box) => scaleBox(box, displayW, displayH));
}

export function renderOverlays(
  container: HTMLElement,
  boxes: WireBox[],
  displayW: number,
  displayH: number,
): void {
  for (const stale of Array.from(container.querySelectorAll(".overlay-box"))) {
    stale.remove();
  }
  for (const rect of drawOverlays(boxes, displayW, displayH)) {
    const el = document.createElement("div");
    el.className = "overlay-box";
    el.dataset.label = rect.label;
    el.style.left = `${rect.left}px`;
    el.style.top = `${rect.top}px`;
    el.style.width = `${rect.width}px`;
    el.style.height = `${rect.height}px`;
    const caption = document.createElement("span");
    caption.className = "caption";
    caption.textContent = `${rect.label} ${(rect.score * 100).toFixed(0)}%`;
    el.appendChild(caption);
    container.appendChild(el);
  }
}
