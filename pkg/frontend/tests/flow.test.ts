// Browser flow against the real fixture server (spawned in
// fixture-server.ts): main -> picker -> result -> detail -> back.

import { File as NodeFile } from "node:buffer";
import { afterEach, describe, expect, inject, it, vi } from "vitest";

import { createApp } from "../src/app.js";
import { appRoot } from "./dom.js";
import type { DatingResponse } from "../src/types.js";

const baseUrl = inject("baseUrl");
const objectUrlFor = () => "blob:local-photo";

async function fixturePhoto(): Promise<File> {
  const response = await fetch(`${baseUrl}/api/v1/artifacts/d001/image`);
  const bytes = new Uint8Array(await response.arrayBuffer());
  return new NodeFile([bytes], "photo.png", { type: "image/png" }) as unknown as File;
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe.skipIf(!baseUrl)("live browser flow", () => {
  it("main -> upload -> result -> reference detail -> back", async () => {
    const root = appRoot();
    const app = createApp(root, { baseUrl, objectUrlFor });

    // main screen with both upload affordances and the hidden picker
    expect(root.querySelector('[data-role="take-photo"]')).toBeTruthy();
    expect(root.querySelector('[data-role="pick-photo"]')).toBeTruthy();
    expect(root.querySelector('[data-role="photo-input"]')).toBeTruthy();

    await app.submitFile(await fixturePhoto());

    // result screen: four period rows with percentages
    const rows = root.querySelectorAll('[data-role="period-row"]');
    expect(rows).toHaveLength(4);
    for (const row of Array.from(rows)) {
      expect(row.querySelector(".prob")?.textContent).toMatch(/^\d+\.\d%$/);
    }

    // three stub boxes drawn as overlay elements
    const overlays = root.querySelectorAll(".overlay-box");
    expect(overlays).toHaveLength(3);
    const labels = Array.from(overlays).map(
      (el) => (el as HTMLElement).dataset.label,
    );
    expect(labels.sort()).toEqual(["decoration", "handle", "leg"]);

    // three references (fixture catalog has three artifacts)
    const refs = root.querySelectorAll('[data-role="reference"]');
    expect(refs).toHaveLength(3);

    // click the first reference: detail screen with all five fields
    const firstId = (refs[0] as HTMLElement).dataset.artifactId!;
    await app.showReference(firstId);
    for (const field of ["period", "shape", "literature", "excavation", "museum"]) {
      const dd = root.querySelector(`[data-role="field-${field}"]`);
      expect(dd, `missing field ${field}`).toBeTruthy();
    }

    // back returns to the result screen with the grid intact
    (root.querySelector('[data-role="back"]') as HTMLElement).click();
    expect(root.querySelectorAll('[data-role="reference"]')).toHaveLength(3);

    // and back again reaches the main screen
    (root.querySelector('[data-role="back"]') as HTMLElement).click();
    expect(root.querySelector('[data-role="take-photo"]')).toBeTruthy();
  });

  it("CJK annotation fields render unmodified", async () => {
    const root = appRoot();
    const app = createApp(root, { baseUrl, objectUrlFor });
    await app.showReference("d003");
    expect(
      root.querySelector('[data-role="field-literature"]')?.textContent,
    ).toBe("青铜器图录 12");
    expect(root.querySelector('[data-role="field-museum"]')?.textContent).toBe(
      "博物馆",
    );
  });

  it("unknown reference id shows the placeholder with back intact", async () => {
    const root = appRoot();
    const app = createApp(root, { baseUrl, objectUrlFor });
    await app.showReference("does-not-exist");
    expect(root.querySelector('[data-role="detail-missing"]')).toBeTruthy();
    expect(root.querySelector('[data-role="back"]')).toBeTruthy();
  });

  it("server error statuses surface as banners", async () => {
    const root = appRoot();
    const app = createApp(root, { baseUrl, objectUrlFor });
    const textFile = new NodeFile([new TextEncoder().encode("not pixels")], "a.txt", {
      type: "text/plain",
    }) as unknown as File;
    await app.submitFile(textFile); // server answers 415
    const banner = root.querySelector(".banner.error");
    expect(banner?.textContent).toContain("not a JPEG or PNG");
  });
});

describe("flows not reachable through the live fixture", () => {
  it("other_stuffs response shows the banner and zero period rows", async () => {
    const canned: DatingResponse = {
      decision: { outcome: "other_stuffs", ranked: [], top1_probability: 0.031 },
      boxes: [],
      references: [],
      model_descriptor: "nnx:test",
      timing_ms: { total: 1.0 },
      warnings: [],
    };
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => new Response(JSON.stringify(canned), { status: 200 })),
    );
    const root = appRoot();
    const app = createApp(root, { objectUrlFor });
    const photo = new NodeFile([new Uint8Array(16)], "p.png", {
      type: "image/png",
    }) as unknown as File;
    await app.submitFile(photo);
    expect(root.querySelector('[data-role="reject-banner"]')).toBeTruthy();
    expect(root.querySelectorAll('[data-role="period-row"]')).toHaveLength(0);
  });

  it("oversized file is rejected client-side without a network call", async () => {
    const fetchSpy = vi.fn();
    vi.stubGlobal("fetch", fetchSpy);
    const root = appRoot();
    const app = createApp(root, { objectUrlFor, maxUploadBytes: 8 });
    const big = new NodeFile([new Uint8Array(64)], "big.png", {
      type: "image/png",
    }) as unknown as File;
    await app.submitFile(big);
    expect(fetchSpy).not.toHaveBeenCalled();
    expect(root.querySelector(".banner.error")?.textContent).toContain("too large");
  });

  it("network failure offers a retry affordance", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => {
        throw new TypeError("network down");
      }),
    );
    const root = appRoot();
    const app = createApp(root, { objectUrlFor });
    const photo = new NodeFile([new Uint8Array(16)], "p.png", {
      type: "image/png",
    }) as unknown as File;
    await app.submitFile(photo);
    expect(root.querySelector('[data-role="retry"]')).toBeTruthy();
  });
});
