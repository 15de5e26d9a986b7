import { describe, expect, it } from "vitest";

import { formatProbability, periodLabel, toResultViewModel } from "../src/viewmodel.js";
import type { DatingResponse } from "../src/types.js";

function response(overrides: Partial<DatingResponse> = {}): DatingResponse {
  return {
    decision: {
      outcome: "dated",
      ranked: [
        { period: "Shang.Late", probability: 0.41234 },
        { period: "WesternZhou.Early", probability: 0.2 },
        { period: "WesternZhou.Mid", probability: 0.15 },
        { period: "Shang.Early", probability: 0.1 },
      ],
      top1_probability: 0.41234,
    },
    boxes: [
      { label: "handle", score: 0.95, x0: 0.3, y0: 0.05, x1: 0.7, y1: 0.2 },
    ],
    references: [
      { artifact_id: "d001", similarity: 0.91, image_url: "/api/v1/artifacts/d001/image" },
    ],
    model_descriptor: "nnx:test",
    timing_ms: { preprocess: 1.5, forward: 2.25, total: 4.0 },
    warnings: [],
    ...overrides,
  };
}

describe("view model mapping", () => {
  it("every on-screen number traces to a response field", () => {
    const vm = toResultViewModel(response(), "blob:photo");
    expect(vm.rows.map((r) => r.probability)).toEqual(
      ["41.2%", "20.0%", "15.0%", "10.0%"], // percentages, one decimal
    );
    expect(vm.references[0].similarity).toBe("0.910");
    expect(vm.timing).toContainEqual(["forward", "2.3 ms"]);
    expect(vm.boxes).toEqual(response().boxes); // normalized boxes pass through
    expect(vm.photoUrl).toBe("blob:photo");
  });

  it("other_stuffs yields the banner state and zero rows", () => {
    const vm = toResultViewModel(
      response({
        decision: { outcome: "other_stuffs", ranked: [], top1_probability: 0.034 },
      }),
      "blob:photo",
    );
    expect(vm.rejected).toBe(true);
    expect(vm.rows).toHaveLength(0);
  });

  it("reference grid is capped at five", () => {
    const refs = Array.from({ length: 9 }, (_, i) => ({
      artifact_id: `d${i}`,
      similarity: 0.5,
      image_url: `/api/v1/artifacts/d${i}/image`,
    }));
    const vm = toResultViewModel(response({ references: refs }), "blob:x");
    expect(vm.references).toHaveLength(5);
  });

  it("bilingual period labels", () => {
    expect(periodLabel("Shang.Late")).toBe("商晚期 · Shang Late");
    expect(periodLabel("WarringStates.Early")).toBe(
      "战国早期 · Warring States Early",
    );
  });

  it("probability formatting is one-decimal percent", () => {
    expect(formatProbability(1)).toBe("100.0%");
    expect(formatProbability(0.0499)).toBe("5.0%");
    expect(formatProbability(0.106)).toBe("10.6%");
  });
});
