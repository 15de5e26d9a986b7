// Response-to-screen mapping. No dating logic lives here: every number
// shown on screen is a field of the server response, at most reformatted.

import type { DatingResponse, WireBox, WireReference } from "./types.js";

const DYNASTY_ZH: Record<string, string> = {
  Shang: "商",
  WesternZhou: "西周",
  SpringAndAutumn: "春秋",
  WarringStates: "战国",
};

const DYNASTY_EN: Record<string, string> = {
  Shang: "Shang",
  WesternZhou: "Western Zhou",
  SpringAndAutumn: "Spring and Autumn",
  WarringStates: "Warring States",
};

const PHASE_ZH: Record<string, string> = {
  Early: "早期",
  Mid: "中期",
  Late: "晚期",
};

export function periodLabel(period: string): string {
  const [dynasty, phase] = period.split(".");
  const zh = DYNASTY_ZH[dynasty] && PHASE_ZH[phase]
    ? `${DYNASTY_ZH[dynasty]}${PHASE_ZH[phase]}`
    : period;
  const en = DYNASTY_EN[dynasty] ? `${DYNASTY_EN[dynasty]} ${phase}` : period;
  return `${zh} · ${en}`;
}

export function formatProbability(probability: number): string {
  return `${(probability * 100).toFixed(1)}%`;
}

export interface PeriodRow {
  label: string;
  probability: string;
}

export interface ReferenceCell {
  id: string;
  similarity: string;
  imageUrl: string;
}

export interface ResultViewModel {
  photoUrl: string;
  rejected: boolean;
  rows: PeriodRow[];
  boxes: WireBox[];
  references: ReferenceCell[];
  timing: [string, string][];
  warnings: string[];
}

export function toResultViewModel(
  response: DatingResponse,
  photoUrl: string,
): ResultViewModel {
  const rejected = response.decision.outcome === "other_stuffs";
  const rows = rejected
    ? []
    : response.decision.ranked.map((r) => ({
        label: periodLabel(r.period),
        probability: formatProbability(r.probability),
      }));
  return {
    photoUrl,
    rejected,
    rows,
    boxes: response.boxes,
    references: response.references.slice(0, 5).map((ref: WireReference) => ({
      id: ref.artifact_id,
      similarity: ref.similarity.toFixed(3),
      imageUrl: ref.image_url,
    })),
    timing: Object.entries(response.timing_ms).map(([stage, ms]) => [
      stage,
      `${ms.toFixed(1)} ms`,
    ]),
    warnings: response.warnings,
  };
}
