// Behavioral capture pieces: stroke downsampling and media stat folding.

import { describe, expect, it } from "vitest";

import type { BehavioralEvent } from "../src/engine.js";
import { foldMediaStats, attachMediaTelemetry } from "../src/media.js";
import { MAX_POINTS_PER_SECOND, StrokeRecorder } from "../src/strokes.js";

function ev(kind: string, t: number, asset = "a1"): BehavioralEvent {
  return { kind, t, payload: { asset_id: asset }, flags: [] };
}

describe("stroke recorder", () => {
  it("downsamples to at most 240 points per second", () => {
    const recorder = new StrokeRecorder(500, 300);
    recorder.begin(0, 0, 0);
    for (let t = 1; t <= 1000; t += 1) {
      recorder.move(t % 499, t % 299, t);
    }
    recorder.end(499, 299, 1001);
    const points = recorder.strokes[0];
    expect(points.length).toBeLessThanOrEqual(MAX_POINTS_PER_SECOND + 2);
    for (let i = 2; i < points.length - 1; i += 1) {
      expect(points[i].t - points[i - 1].t).toBeGreaterThanOrEqual(1000 / 240);
    }
  });

  it("clamps coordinates into the canvas", () => {
    const recorder = new StrokeRecorder(100, 50);
    recorder.begin(-20, 80, 0);
    recorder.end(150, -5, 10);
    for (const stroke of recorder.strokes) {
      for (const p of stroke) {
        expect(p.x).toBeGreaterThanOrEqual(0);
        expect(p.x).toBeLessThan(100);
        expect(p.y).toBeGreaterThanOrEqual(0);
        expect(p.y).toBeLessThan(50);
      }
    }
  });

  it("keeps per-stroke timestamps non-decreasing", () => {
    const recorder = new StrokeRecorder(100, 100);
    recorder.begin(1, 1, 100);
    recorder.move(2, 2, 90); // clock went backwards: dropped
    recorder.move(3, 3, 200);
    recorder.end(4, 4, 150); // end clamps to the last seen time
    const ts = recorder.strokes[0].map((p) => p.t);
    expect(ts).toEqual([...ts].sort((a, b) => a - b));
  });
});

describe("media stats fold", () => {
  it("counts a simulated stall", () => {
    const events = [ev("media-play", 0), ev("media-stall-start", 1000),
                    ev("media-stall-end", 1500), ev("media-ended", 5000)];
    const stats = foldMediaStats(events, "a1");
    expect(stats.stallCount).toBe(1);
    expect(stats.totalStallMs).toBe(500);
    expect(stats.playbackMs).toBe(5000);
    expect(stats.completed).toBe(true);
  });

  it("closes an unmatched stall at the end of the log and flags it", () => {
    const events = [ev("media-play", 0), ev("media-stall-start", 200),
                    ev("media-pause", 900)];
    const stats = foldMediaStats(events, "a1");
    expect(stats.totalStallMs).toBe(700);
    expect(stats.flags).toContain("unclosed-stall");
  });

  it("telemetry wiring turns element events into stall pairs", () => {
    const listeners = new Map<string, () => void>();
    const element = {
      addEventListener: (type: string, listener: () => void) =>
        listeners.set(type, listener),
      removeEventListener: (type: string, _listener: () => void) =>
        listeners.delete(type),
    };
    const recorded: Array<[string, Record<string, string>]> = [];
    const detach = attachMediaTelemetry(element, "clip",
                                        (kind, payload) => recorded.push([kind, payload]));
    listeners.get("play")!();
    listeners.get("waiting")!();
    listeners.get("waiting")!(); // double waiting: one stall interval
    listeners.get("playing")!();
    listeners.get("ended")!();
    expect(recorded.map(([k]) => k)).toEqual(
      ["media-play", "media-stall-start", "media-stall-end", "media-ended"]);
    detach();
    expect(listeners.size).toBe(0);
  });
});
