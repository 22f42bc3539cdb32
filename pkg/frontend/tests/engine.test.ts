// The UI-side engine must pass the identical state-machine vector suite
// as the reference engine, down to the exported CSV bytes.

import { describe, expect, it } from "vitest";

import { toCsvBytes } from "../src/csv.js";
import { answersAsJson, base64ToBytes, loadVectors, replayCase } from "./vectors.js";

const cases = loadVectors();

describe("conformance vectors", () => {
  it("has a healthy number of cases", () => {
    expect(cases.length).toBeGreaterThanOrEqual(30);
  });

  for (const c of cases) {
    it(`replays ${c.name}`, () => {
      const session = replayCase(c);
      expect(session.status).toBe(c.final.status);
      const shown = session.events
        .filter((e) => e.kind === "screen-shown")
        .map((e) => e.payload.screen_id);
      expect(shown).toEqual(c.final.shown_sequence);
      expect(answersAsJson(session)).toEqual(c.final.answers);
      expect(Object.fromEntries(session.revisions)).toEqual(c.final.revisions);
      expect(session.events.map((e) => ({
        kind: e.kind, t: e.t, payload: e.payload, flags: [...e.flags].sort(),
      }))).toEqual(c.final.events);
      expect(toCsvBytes(session)).toEqual(base64ToBytes(c.final.csv_base64));
    });
  }
});
