// Shapes of the prediction service's JSON API.

export interface FactorSpec {
  name: string;
  kind: "continuous" | "discrete";
  states: string[];
  controllable: boolean;
  bounds: number[]; // [min, max] for continuous factors
}

export interface ModelInfo {
  id: string;
  name: string;
  fusion: string;
  members: number;
  strategy: string | null;
  validation_error: number | null;
  format_version: number;
  schema: FactorSpec[];
}

export interface RiskResult {
  class: number; // 1 = defect predicted
  risk: number; // defect-risk fraction in [0, 1]
  fusion: string;
}

export interface RiskResponse {
  results: Record<string, RiskResult>;
  setting: Record<string, Array<number | string>>;
  warnings: string[];
  elapsed_ms: number;
}

export interface EnvelopeFactor {
  factor: string;
  kind: "continuous" | "discrete";
  points: Array<[number | string, number, number]>; // [level, lower, upper]
  recommended_levels: Array<number | string>;
  interval: [number | string, number | string] | null;
  empty: boolean;
}

export interface DoeResponse {
  model: string;
  runs: number;
  members: number;
  envelope: Record<string, unknown>;
  plot_data: EnvelopeFactor[];
}
