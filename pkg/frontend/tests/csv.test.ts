// CSV writer units; full byte-level conformance is covered by the vector
// replay in engine.test.ts.

import { describe, expect, it } from "vitest";

import { canonicalDecimal, quantize } from "../src/answers.js";
import { canonicalJson, cell, writeRows } from "../src/csv.js";

describe("cell quoting", () => {
  it("quotes exactly on comma, quote, CR, LF", () => {
    expect(cell("plain")).toBe("plain");
    expect(cell("")).toBe("");
    expect(cell(" spaced ")).toBe(" spaced ");
    expect(cell("a,b")).toBe('"a,b"');
    expect(cell('say "hi"')).toBe('"say ""hi"""');
    expect(cell("a\nb")).toBe('"a\nb"');
    expect(cell("a\rb")).toBe('"a\rb"');
    expect(cell("ümlaut")).toBe("ümlaut");
  });

  it("terminates every row with LF", () => {
    expect(writeRows([["a", "b"], ["c", "d,e"]])).toBe('a,b\nc,"d,e"\n');
    expect(writeRows([])).toBe("");
  });
});

describe("canonical JSON", () => {
  it("sorts keys recursively and stays compact", () => {
    expect(canonicalJson({ b: 1, a: { d: [2, { z: 0, y: 1 }], c: "x" } }))
      .toBe('{"a":{"c":"x","d":[2,{"y":1,"z":0}]},"b":1}');
  });

  it("keeps non-ASCII raw and escapes control characters", () => {
    expect(canonicalJson({ k: "ü\n日" })).toBe('{"k":"ü\\n日"}');
  });
});

describe("continuous decimals", () => {
  it("renders quantized values exactly", () => {
    expect(canonicalDecimal(quantize(0))).toBe("0");
    expect(canonicalDecimal(quantize(1))).toBe("1");
    expect(canonicalDecimal(quantize(0.5))).toBe("0.5");
    expect(canonicalDecimal(quantize(0.0001))).toBe("0.0001");
    expect(canonicalDecimal(quantize(0.123456))).toBe("0.1235");
    expect(canonicalDecimal(quantize(0.0078125))).toBe("0.0078");
  });
});
