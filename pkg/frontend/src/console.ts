// Orchestration: submit a what-if, keep history, surface envelope charts.

import { ApiClient, ServiceError } from "./api.js";
import { EnvelopeCache, chartsOf, type EnvelopeChart } from "./envelope.js";
import { formSetting, formValid, type FieldState } from "./form.js";
import { HistoryStore, type HistoryEntry } from "./history.js";
import { gaugesOf, type GaugeView, type RiskThresholds } from "./risk.js";
import type { RiskResponse } from "./types.js";

export interface WhatifOutcome {
  gauges: GaugeView[];
  warnings: string[];
  entry: HistoryEntry;
  response: RiskResponse;
}

export class OperatorConsole {
  readonly history = new HistoryStore();
  private envelopeCache = new EnvelopeCache();
  banner: string | null = null;

  constructor(
    private api: ApiClient,
    private thresholds?: RiskThresholds,
  ) {}

  /** POST the form's setting; renders gauges from the response verbatim and
   * appends to history. Service failures raise a banner and leave both the
   * form state and the history untouched. */
  async submitWhatif(
    operatingPoint: Record<string, number | string>,
    fields: FieldState[],
  ): Promise<WhatifOutcome> {
    if (!formValid(fields)) {
      throw new Error("form invalid: submit should be disabled");
    }
    const setting = formSetting(fields);
    let response: RiskResponse;
    try {
      response = await this.api.whatif(operatingPoint, setting);
    } catch (err) {
      this.banner = err instanceof ServiceError ? `service error ${err.status}: ${err.message}` : String(err);
      throw err;
    }
    this.banner = null;
    const entry = this.history.append(setting, response);
    return { gauges: gaugesOf(response, this.thresholds), warnings: response.warnings, entry, response };
  }

  /** Re-submit an earlier history row (round-trip check for the operator). */
  async resubmit(operatingPoint: Record<string, number | string>, entry: HistoryEntry): Promise<WhatifOutcome> {
    const response = await this.api.whatif(operatingPoint, entry.setting);
    const newEntry = this.history.append(entry.setting, response);
    return { gauges: gaugesOf(response, this.thresholds), warnings: response.warnings, entry: newEntry, response };
  }

  /** Envelope charts for the current operating point, cached until it changes. */
  async envelopes(
    operatingPoint: Record<string, number | string>,
    levels = 10,
    model?: string,
  ): Promise<EnvelopeChart[]> {
    const cached = this.envelopeCache.get(operatingPoint);
    if (cached) return cached;
    const response = await this.api.doe(operatingPoint, levels, model);
    const charts = chartsOf(response);
    this.envelopeCache.put(operatingPoint, charts);
    return charts;
  }

  dismissBanner(): void {
    this.banner = null;
  }
}
