// Wire types mirroring the service's published response schema.

export type Outcome = "dated" | "other_stuffs";

export interface RankedPeriod {
  period: string;
  probability: number;
}

export interface Decision {
  outcome: Outcome;
  ranked: RankedPeriod[];
  top1_probability: number;
}

export interface WireBox {
  label: string;
  score: number;
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

export interface WireReference {
  artifact_id: string;
  similarity: number;
  image_url: string;
}

export interface DatingResponse {
  decision: Decision;
  boxes: WireBox[];
  references: WireReference[];
  model_descriptor: string;
  timing_ms: Record<string, number>;
  warnings: string[];
}

export interface ArtifactDetail {
  id: string;
  period: string;
  shape: string;
  literature: string;
  excavation: string;
  museum: string;
  image_url: string;
}
