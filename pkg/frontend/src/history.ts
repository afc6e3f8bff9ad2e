// Append-only session history of tested settings and their risks.

import type { RiskResponse } from "./types.js";

export interface HistoryEntry {
  index: number;
  setting: Record<string, number | string>;
  response: RiskResponse;
  timestamp: string;
}

export class HistoryStore {
  private entries: HistoryEntry[] = [];

  append(setting: Record<string, number | string>, response: RiskResponse, now = new Date()): HistoryEntry {
    const entry: HistoryEntry = {
      index: this.entries.length,
      setting: { ...setting },
      response,
      timestamp: now.toISOString(),
    };
    this.entries.push(entry);
    return entry;
  }

  list(): readonly HistoryEntry[] {
    return this.entries;
  }

  get size(): number {
    return this.entries.length;
  }

  /** Settings plus one risk column per model, for the export button. */
  toCsv(): string {
    if (this.entries.length === 0) return "";
    const settingKeys = Object.keys(this.entries[0].setting).sort();
    const modelIds = Object.keys(this.entries[0].response.results).sort();
    const header = ["index", "timestamp", ...settingKeys, ...modelIds.map((m) => `risk_${m}`)];
    const rows = this.entries.map((e) => [
      String(e.index),
      e.timestamp,
      ...settingKeys.map((k) => String(e.setting[k])),
      ...modelIds.map((m) => String(e.response.results[m]?.risk ?? "")),
    ]);
    return [header, ...rows].map((r) => r.join(",")).join("\n") + "\n";
  }
}
