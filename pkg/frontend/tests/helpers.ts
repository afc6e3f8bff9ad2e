import type { RiskResponse } from "../src/types.js";

export function riskResponse(byModel: Record<string, { risk: number; klass: number }>): RiskResponse {
  const results: RiskResponse["results"] = {};
  for (const [id, r] of Object.entries(byModel)) {
    results[id] = { class: r.klass, risk: r.risk, fusion: "vote" };
  }
  return { results, setting: {}, warnings: [], elapsed_ms: 1.0 };
}

export interface StubCall {
  url: string;
  init?: RequestInit;
}

/** fetch stub returning queued responses and recording every call. */
export function stubFetch(queue: Array<{ status?: number; body: unknown }>) {
  const calls: StubCall[] = [];
  const fn = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    calls.push({ url: String(input), init });
    const next = queue.shift();
    if (!next) throw new Error("stub queue empty");
    if (init?.signal?.aborted) throw new DOMException("aborted", "AbortError");
    return new Response(JSON.stringify(next.body), {
      status: next.status ?? 200,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { fn: fn as typeof fetch, calls };
}
