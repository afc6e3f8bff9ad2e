// Client for the prediction service. All risk numbers come from here; the
// console never computes one locally.

import type { DoeResponse, ModelInfo, RiskResponse } from "./types.js";

export class ServiceError extends Error {
  constructor(
    message: string,
    public status: number,
  ) {
    super(message);
  }
}

export class ApiClient {
  private inflight: AbortController | null = null;

  constructor(
    private baseUrl: string = "",
    private fetchFn: typeof fetch = fetch,
  ) {}

  async getModels(): Promise<ModelInfo[]> {
    const res = await this.fetchFn(`${this.baseUrl}/models`);
    if (!res.ok) throw new ServiceError(await res.text(), res.status);
    return res.json();
  }

  /**
   * POST /whatif. Only one request may be in flight: a resubmission aborts
   * the pending one. A 422 still carries the evaluated risks (out-of-bounds
   * values are flagged, not refused), so it resolves normally.
   */
  async whatif(
    operatingPoint: Record<string, number | string>,
    setting: Record<string, number | string>,
  ): Promise<RiskResponse> {
    if (this.inflight) this.inflight.abort();
    const controller = new AbortController();
    this.inflight = controller;
    try {
      const res = await this.fetchFn(`${this.baseUrl}/whatif`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ operating_point: operatingPoint, setting }),
        signal: controller.signal,
      });
      if (!res.ok && res.status !== 422) {
        throw new ServiceError(await res.text(), res.status);
      }
      return res.json();
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
  }

  async doe(
    operatingPoint: Record<string, number | string>,
    levels = 10,
    model?: string,
  ): Promise<DoeResponse> {
    const res = await this.fetchFn(`${this.baseUrl}/doe`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ operating_point: operatingPoint, levels, model: model ?? null }),
    });
    if (!res.ok) throw new ServiceError(await res.text(), res.status);
    return res.json();
  }
}
