// Setup-form state: one field per controllable factor, validated against the
// schema; the operating point is shown read-only and never edited here.

import type { FactorSpec } from "./types.js";

export interface FieldState {
  factor: FactorSpec;
  raw: string;
  error: string | null;
  outOfBounds: boolean;
}

export function controllableFactors(schema: FactorSpec[]): FactorSpec[] {
  return schema.filter((f) => f.controllable);
}

export function emptyField(factor: FactorSpec): FieldState {
  return { factor, raw: factor.kind === "discrete" ? factor.states[0] : "", error: null, outOfBounds: false };
}

export function boundsHint(factor: FactorSpec): string {
  if (factor.kind === "discrete") return factor.states.join(" | ");
  const [lo, hi] = factor.bounds;
  return `${lo} .. ${hi}`;
}

/** Re-validate a field after edit. Out-of-bounds numbers are legal to submit
 * (the service flags them); only unparseable or empty input blocks submit. */
export function setValue(field: FieldState, raw: string): FieldState {
  const next: FieldState = { ...field, raw, error: null, outOfBounds: false };
  if (field.factor.kind === "discrete") {
    if (!field.factor.states.includes(raw)) next.error = `pick one of: ${field.factor.states.join(", ")}`;
    return next;
  }
  if (raw.trim() === "") {
    next.error = "required";
    return next;
  }
  const value = Number(raw);
  if (!Number.isFinite(value)) {
    next.error = "not a number";
    return next;
  }
  const [lo, hi] = field.factor.bounds;
  next.outOfBounds = value < lo || value > hi;
  return next;
}

export function formValid(fields: FieldState[]): boolean {
  return fields.every((f) => f.error === null && f.raw.trim() !== "");
}

export function formSetting(fields: FieldState[]): Record<string, number | string> {
  const out: Record<string, number | string> = {};
  for (const f of fields) {
    out[f.factor.name] = f.factor.kind === "discrete" ? f.raw : Number(f.raw);
  }
  return out;
}
