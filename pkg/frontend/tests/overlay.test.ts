import { describe, expect, it } from "vitest";

import { drawOverlays, renderOverlays, scaleBox } from "../src/overlay.js";
import type { WireBox } from "../src/types.js";

const box = (x0: number, y0: number, x1: number, y1: number): WireBox => ({
  label: "handle",
  score: 0.9,
  x0,
  y0,
  x1,
  y1,
});

describe("overlay geometry", () => {
  it("maps the unit box to the full frame", () => {
    const rect = scaleBox(box(0, 0, 1, 1), 224, 224);
    expect(rect).toMatchObject({ left: 0, top: 0, width: 224, height: 224 });
  });

  it("is exactly linear in the display size", () => {
    const normalized = box(0.25, 0.1, 0.75, 0.6);
    const small = scaleBox(normalized, 300, 150);
    const large = scaleBox(normalized, 600, 300);
    expect(large.left).toBe(2 * small.left);
    expect(large.top).toBe(2 * small.top);
    expect(large.width).toBe(2 * small.width);
    expect(large.height).toBe(2 * small.height);
  });

  it("handles the empty list", () => {
    expect(drawOverlays([], 100, 100)).toEqual([]);
  });

  it("renders one positioned element per box and clears stale ones", () => {
    const container = document.createElement("div");
    renderOverlays(container, [box(0.25, 0.25, 0.75, 0.75)], 100, 200);
    let rects = container.querySelectorAll(".overlay-box");
    expect(rects).toHaveLength(1);
    const style = (rects[0] as HTMLElement).style;
    expect(style.left).toBe("25px");
    expect(style.top).toBe("50px");
    expect(style.width).toBe("50px");
    expect(style.height).toBe("100px");

    renderOverlays(container, [], 100, 200);
    rects = container.querySelectorAll(".overlay-box");
    expect(rects).toHaveLength(0);
  });

  it("captions carry the label", () => {
    const container = document.createElement("div");
    renderOverlays(container, [box(0, 0, 0.5, 0.5)], 100, 100);
    const caption = container.querySelector(".caption");
    expect(caption?.textContent).toContain("handle");
  });
});
