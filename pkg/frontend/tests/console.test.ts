import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { OperatorConsole } from "../src/console.js";
import { emptyField, setValue } from "../src/form.js";
import type { FactorSpec } from "../src/types.js";
import { riskResponse, stubFetch } from "./helpers.js";

const speed: FactorSpec = { name: "speed", kind: "continuous", states: [], controllable: true, bounds: [0, 10] };
const mode: FactorSpec = { name: "mode", kind: "discrete", states: ["a", "b"], controllable: true, bounds: [] };
const op = { temperature: 21.5 };

function filledFields() {
  return [setValue(emptyField(speed), "4.5"), setValue(emptyField(mode), "b")];
}

describe("what-if submission", () => {
  it("displays exactly the risk values intercepted from the service", async () => {
    const intercepted = riskResponse({
      stain_on_back: { risk: 0.3137254901960784, klass: 0 },
      drip: { risk: 0.75, klass: 1 },
    });
    const { fn, calls } = stubFetch([{ body: intercepted }]);
    const app = new OperatorConsole(new ApiClient("", fn));
    const outcome = await app.submitWhatif(op, filledFields());
    expect(calls.length).toBe(1);
    expect(calls[0].url).toBe("/whatif");
    const sent = JSON.parse(String(calls[0].init?.body));
    expect(sent.operating_point).toEqual(op);
    expect(sent.setting).toEqual({ speed: 4.5, mode: "b" });
    // fidelity: gauge numbers are the response values, bit for bit
    const byId = Object.fromEntries(outcome.gauges.map((g) => [g.modelId, g]));
    expect(byId.stain_on_back.risk).toBe(0.3137254901960784);
    expect(byId.drip.risk).toBe(0.75);
    expect(byId.drip.classBadge).toBe("defect");
  });

  it("appends each submission to the history", async () => {
    const { fn } = stubFetch([
      { body: riskResponse({ m: { risk: 0.2, klass: 0 } }) },
      { body: riskResponse({ m: { risk: 0.2, klass: 0 } }) },
    ]);
    const app = new OperatorConsole(new ApiClient("", fn));
    await app.submitWhatif(op, filledFields());
    await app.submitWhatif(op, filledFields());
    expect(app.history.size).toBe(2);
    expect(app.history.list()[0].response.results.m.risk).toBe(0.2);
  });

  it("history rows round-trip: resubmission reproduces the stored risk", async () => {
    const body = riskResponse({ m: { risk: 0.3333333333333333, klass: 0 } });
    const { fn } = stubFetch([{ body }, { body }]);
    const app = new OperatorConsole(new ApiClient("", fn));
    const first = await app.submitWhatif(op, filledFields());
    const again = await app.resubmit(op, first.entry);
    expect(again.response.results.m.risk).toBe(first.response.results.m.risk);
    expect(app.history.size).toBe(2);
  });

  it("service failure raises a banner and leaves history unchanged", async () => {
    const { fn } = stubFetch([{ status: 500, body: { error: "down" } }]);
    const app = new OperatorConsole(new ApiClient("", fn));
    await expect(app.submitWhatif(op, filledFields())).rejects.toThrow();
    expect(app.banner).toContain("500");
    expect(app.history.size).toBe(0);
    app.dismissBanner();
    expect(app.banner).toBeNull();
  });

  it("a 422 out-of-bounds answer still renders risks plus the warning", async () => {
    const body = riskResponse({ m: { risk: 0.6, klass: 1 } });
    body.warnings = ["factor 'speed': value 99 outside bounds [0, 10]"];
    const { fn } = stubFetch([{ status: 422, body }]);
    const app = new OperatorConsole(new ApiClient("", fn));
    const fields = [setValue(emptyField(speed), "99"), setValue(emptyField(mode), "a")];
    expect(fields[0].outOfBounds).toBe(true); // shown as a hint, not a blocker
    const outcome = await app.submitWhatif(op, fields);
    expect(outcome.gauges[0].risk).toBe(0.6);
    expect(outcome.warnings[0]).toContain("speed");
  });

  it("refuses to submit an invalid form", async () => {
    const { fn } = stubFetch([]);
    const app = new OperatorConsole(new ApiClient("", fn));
    const fields = [setValue(emptyField(speed), "not-a-number"), setValue(emptyField(mode), "a")];
    await expect(app.submitWhatif(op, fields)).rejects.toThrow(/invalid/);
  });
});
