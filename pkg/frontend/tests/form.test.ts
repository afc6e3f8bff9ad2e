import { describe, expect, it } from "vitest";

import { boundsHint, controllableFactors, emptyField, formSetting, formValid, setValue } from "../src/form.js";
import type { FactorSpec } from "../src/types.js";

const schema: FactorSpec[] = [
  { name: "basis_weight", kind: "continuous", states: [], controllable: true, bounds: [80, 150] },
  { name: "num_passes", kind: "discrete", states: ["1", "2", "3"], controllable: true, bounds: [] },
  { name: "temperature", kind: "continuous", states: [], controllable: false, bounds: [15, 30] },
];

describe("setup form", () => {
  it("builds one field per controllable factor only", () => {
    const fields = controllableFactors(schema).map(emptyField);
    expect(fields.map((f) => f.factor.name)).toEqual(["basis_weight", "num_passes"]);
  });

  it("shows bounds hints", () => {
    expect(boundsHint(schema[0])).toBe("80 .. 150");
    expect(boundsHint(schema[1])).toBe("1 | 2 | 3");
  });

  it("blocks submission until every field is valid", () => {
    let fields = controllableFactors(schema).map(emptyField);
    expect(formValid(fields)).toBe(false); // continuous field still empty
    fields = [setValue(fields[0], "abc"), fields[1]];
    expect(fields[0].error).toBe("not a number");
    expect(formValid(fields)).toBe(false);
    fields = [setValue(fields[0], "120"), fields[1]];
    expect(formValid(fields)).toBe(true);
  });

  it("flags out-of-bounds values without blocking them", () => {
    const field = setValue(emptyField(schema[0]), "999");
    expect(field.error).toBeNull();
    expect(field.outOfBounds).toBe(true);
    expect(formValid([field])).toBe(true);
  });

  it("converts values to the wire types", () => {
    const fields = [
      setValue(emptyField(schema[0]), "120.5"),
      setValue(emptyField(schema[1]), "2"),
    ];
    expect(formSetting(fields)).toEqual({ basis_weight: 120.5, num_passes: "2" });
  });

  it("rejects unknown discrete states", () => {
    const field = setValue(emptyField(schema[1]), "7");
    expect(field.error).toMatch(/pick one of/);
  });
});
