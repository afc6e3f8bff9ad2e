// Risk-gauge view model. Every number is taken verbatim from a service
// response; formatting only happens at render time.

import type { RiskResponse, RiskResult } from "./types.js";

export interface RiskThresholds {
  green: number; // below: green
  amber: number; // below: amber, at or above: red
}

export const DEFAULT_THRESHOLDS: RiskThresholds = { green: 0.2, amber: 0.5 };

export interface GaugeView {
  modelId: string;
  risk: number; // fraction straight from the response
  percentLabel: string; // e.g. "40%"
  classBadge: "defect" | "no defect";
  confidence: string; // vote-share phrasing
  color: "green" | "amber" | "red";
  fusion: string;
}

export function formatPercent(risk: number): string {
  return `${Math.round(risk * 1000) / 10}%`;
}

export function riskColor(risk: number, thresholds: RiskThresholds = DEFAULT_THRESHOLDS): GaugeView["color"] {
  if (risk < thresholds.green) return "green";
  if (risk < thresholds.amber) return "amber";
  return "red";
}

export function gaugeView(
  modelId: string,
  result: RiskResult,
  thresholds: RiskThresholds = DEFAULT_THRESHOLDS,
): GaugeView {
  return {
    modelId,
    risk: result.risk,
    percentLabel: formatPercent(result.risk),
    classBadge: result.class === 1 ? "defect" : "no defect",
    confidence: `${formatPercent(result.risk)} of members indicate a defect`,
    color: riskColor(result.risk, thresholds),
    fusion: result.fusion,
  };
}

export function gaugesOf(response: RiskResponse, thresholds?: RiskThresholds): GaugeView[] {
  return Object.keys(response.results)
    .sort()
    .map((id) => gaugeView(id, response.results[id], thresholds));
}
