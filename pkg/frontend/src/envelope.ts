// Effect-envelope chart model: a [lower, upper] band per level with the
// service-recommended levels shaded. The recommendation comes straight from
// the /doe response (upper envelope <= 0 levels); the console never rederives
// it from the band values.

import type { DoeResponse, EnvelopeFactor } from "./types.js";

export interface BandPoint {
  level: number | string;
  lower: number;
  upper: number;
  shaded: boolean;
}

export interface EnvelopeChart {
  factor: string;
  kind: "continuous" | "discrete";
  points: BandPoint[];
  intervalLabel: string | null;
  message: string | null; // set when no level is safe
  collapsed: boolean; // single-member band: lower == upper everywhere
}

export function chartOf(factor: EnvelopeFactor): EnvelopeChart {
  const recommended = new Set(factor.recommended_levels.map((l) => String(l)));
  const points = factor.points.map(([level, lower, upper]) => ({
    level,
    lower,
    upper,
    shaded: recommended.has(String(level)),
  }));
  return {
    factor: factor.factor,
    kind: factor.kind,
    points,
    intervalLabel: factor.interval ? `${factor.interval[0]} .. ${factor.interval[1]}` : null,
    message: factor.empty ? "no safe band for this factor at the current operating point" : null,
    collapsed: points.every((p) => p.lower === p.upper),
  };
}

export function chartsOf(response: DoeResponse): EnvelopeChart[] {
  return response.plot_data.map(chartOf);
}

/** Cache keyed by the operating point: a different operating point means the
 * whole factorial plan is stale and must be re-simulated. */
export class EnvelopeCache {
  private key: string | null = null;
  private charts: EnvelopeChart[] | null = null;

  private static keyOf(op: Record<string, number | string>): string {
    return JSON.stringify(Object.keys(op).sort().map((k) => [k, op[k]]));
  }

  get(op: Record<string, number | string>): EnvelopeChart[] | null {
    return EnvelopeCache.keyOf(op) === this.key ? this.charts : null;
  }

  put(op: Record<string, number | string>, charts: EnvelopeChart[]): void {
    this.key = EnvelopeCache.keyOf(op);
    this.charts = charts;
  }

  invalidate(): void {
    this.key = null;
    this.charts = null;
  }
}
