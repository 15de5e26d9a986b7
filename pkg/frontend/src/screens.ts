// DOM construction for the four screens: main, picker (the file input),
// result, and reference detail.

import { renderOverlays } from "./overlay.js";
import { periodLabel } from "./viewmodel.js";
import type { ResultViewModel } from "./viewmodel.js";
import type { ArtifactDetail } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function showBanner(
  root: HTMLElement,
  message: string,
  kind: "error" | "reject",
  onRetry?: () => void,
): void {
  const banner = el("div", `banner ${kind}`);
  banner.appendChild(el("span", undefined, message));
  if (onRetry) {
    const retry = el("button", "secondary", "Retry");
    retry.dataset.role = "retry";
    retry.style.marginLeft = "12px";
    retry.addEventListener("click", onRetry);
    banner.appendChild(retry);
  }
  root.prepend(banner);
}

export interface MainHandlers {
  onFile: (file: File) => void;
}

export function showMain(root: HTMLElement, handlers: MainHandlers): void {
  root.replaceChildren();
  const screen = el("section", "screen main-screen");
  screen.appendChild(el("h1", undefined, "鼎 Bronze Ding Dating"));
  screen.appendChild(
    el(
      "p",
      undefined,
      "Photograph a bronze Ding and the service suggests its period, " +
        "marks the diagnostic parts, and shows similar reference artifacts.",
    ),
  );

  const input = el("input") as HTMLInputElement;
  input.type = "file";
  input.accept = "image/jpeg,image/png";
  input.style.display = "none";
  input.dataset.role = "photo-input";
  input.addEventListener("change", () => {
    const file = input.files?.[0];
    if (file) handlers.onFile(file);
    input.value = "";
  });

  const actions = el("div", "actions");
  // both affordances feed the same upload path
  const camera = el("button", undefined, "拍照 Take photo");
  camera.dataset.role = "take-photo";
  const gallery = el("button", "secondary", "相册 Choose from gallery");
  gallery.dataset.role = "pick-photo";
  for (const button of [camera, gallery]) {
    button.addEventListener("click", () => input.click());
    actions.appendChild(button);
  }

  screen.appendChild(actions);
  screen.appendChild(input);
  root.appendChild(screen);
}

export interface ResultHandlers {
  onBack: () => void;
  onReference: (id: string) => void;
}

// one result screen is live at a time; the previous one drops its listener
let activeResizeHandler: (() => void) | null = null;

export function showResult(
  root: HTMLElement,
  vm: ResultViewModel,
  handlers: ResultHandlers,
): void {
  root.replaceChildren();
  const screen = el("section", "screen result-screen");

  const back = el("button", "secondary back", "← Back");
  back.dataset.role = "back";
  back.addEventListener("click", handlers.onBack);
  screen.appendChild(back);

  const wrap = el("div", "photo-wrap");
  const photo = el("img") as HTMLImageElement;
  photo.src = vm.photoUrl;
  photo.alt = "uploaded photo";
  photo.dataset.role = "photo";
  wrap.appendChild(photo);
  screen.appendChild(wrap);

  // overlays are stored normalized and recomputed from the displayed
  // size, so they track both image load and viewport resizes
  const redraw = () =>
    renderOverlays(wrap, vm.boxes, photo.clientWidth, photo.clientHeight);
  photo.addEventListener("load", redraw);
  if (activeResizeHandler) {
    window.removeEventListener("resize", activeResizeHandler);
  }
  activeResizeHandler = redraw;
  window.addEventListener("resize", redraw);
  redraw();

  const card = el("div", "decision-card");
  if (vm.rejected) {
    const banner = el("div", "banner reject",
      "其它器物 Other stuffs — no period suggested");
    banner.dataset.role = "reject-banner";
    card.appendChild(banner);
  } else {
    for (const row of vm.rows) {
      const rowEl = el("div", "period-row");
      rowEl.dataset.role = "period-row";
      rowEl.appendChild(el("span", "name", row.label));
      rowEl.appendChild(el("span", "prob", row.probability));
      card.appendChild(rowEl);
    }
  }
  screen.appendChild(card);

  screen.appendChild(el("h2", undefined, "Reference artifacts"));
  const grid = el("div", "reference-grid");
  for (const ref of vm.references) {
    const cell = el("div", "reference-cell");
    cell.dataset.role = "reference";
    cell.dataset.artifactId = ref.id;
    const thumb = el("img") as HTMLImageElement;
    thumb.src = ref.imageUrl;
    thumb.alt = ref.id;
    cell.appendChild(thumb);
    cell.appendChild(el("div", "sim", `sim ${ref.similarity}`));
    cell.addEventListener("click", () => handlers.onReference(ref.id));
    grid.appendChild(cell);
  }
  screen.appendChild(grid);

  const timing = el("details", "timing") as HTMLDetailsElement;
  timing.appendChild(el("summary", undefined, "Per-stage timing"));
  const table = el("table");
  for (const [stage, value] of vm.timing) {
    const tr = el("tr");
    tr.appendChild(el("td", undefined, stage));
    tr.appendChild(el("td", undefined, value));
    table.appendChild(tr);
  }
  timing.appendChild(table);
  screen.appendChild(timing);

  root.appendChild(screen);

  return;
}

export interface DetailHandlers {
  onBack: () => void;
}

export function showDetail(
  root: HTMLElement,
  detail: ArtifactDetail | null,
  handlers: DetailHandlers,
): void {
  root.replaceChildren();
  const screen = el("section", "screen detail-screen");

  const back = el("button", "secondary back", "← Back");
  back.dataset.role = "back";
  back.addEventListener("click", handlers.onBack);
  screen.appendChild(back);

  if (detail === null) {
    const placeholder = el("div", "banner error", "Record unavailable.");
    placeholder.dataset.role = "detail-missing";
    screen.appendChild(placeholder);
    root.appendChild(screen);
    return;
  }

  const image = el("img") as HTMLImageElement;
  image.src = detail.image_url;
  image.alt = detail.id;
  image.style.maxWidth = "100%";
  screen.appendChild(image);

  screen.appendChild(el("h2", undefined, periodLabel(detail.period)));

  const fields = el("dl", "detail-fields");
  const labeled: [string, string, string][] = [
    ["period", "时期 Period", periodLabel(detail.period)],
    ["shape", "器形 Shape", detail.shape],
    ["literature", "著录 Literature", detail.literature],
    ["excavation", "出土 Excavation", detail.excavation],
    ["museum", "藏地 Museum", detail.museum],
  ];
  for (const [role, label, value] of labeled) {
    const dt = el("dt", undefined, label);
    const dd = el("dd", undefined, value);
    dd.dataset.role = `field-${role}`;
    fields.appendChild(dt);
    fields.appendChild(dd);
  }
  screen.appendChild(fields);
  root.appendChild(screen);
}

export function showSpinner(root: HTMLElement): HTMLElement {
  const spinner = el("div", "spinner", "Analyzing… 分析中…");
  spinner.dataset.role = "spinner";
  root.appendChild(spinner);
  return spinner;
}
