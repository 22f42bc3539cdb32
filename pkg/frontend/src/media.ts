// Media playback statistics, folded from the behavioral event log with
// the same closure rules as the collection-side implementation.

import type { BehavioralEvent } from "./engine.js";

export interface MediaStats {
  assetId: string;
  stallCount: number;
  totalStallMs: number;
  playbackMs: number;
  completed: boolean;
  flags: string[];
}

export function foldMediaStats(events: BehavioralEvent[], assetId: string): MediaStats {
  const lastT = events.length > 0 ? events[events.length - 1].t : 0;
  let stallCount = 0;
  let totalStall = 0;
  let playback = 0;
  let completed = false;
  const flags = new Set<string>();
  let openStall: number | null = null;
  let openPlay: number | null = null;

  for (const ev of events) {
    if (ev.payload.asset_id !== assetId) continue;
    switch (ev.kind) {
      case "media-play":
        if (openPlay === null) openPlay = ev.t;
        else flags.add("duplicate-play");
        break;
      case "media-pause":
        if (openPlay !== null) {
          playback += Math.max(0, ev.t - openPlay);
          openPlay = null;
        } else flags.add("orphan-pause");
        break;
      case "media-ended":
        completed = true;
        if (openPlay !== null) {
          playback += Math.max(0, ev.t - openPlay);
          openPlay = null;
        }
        break;
      case "media-stall-start":
        if (openStall === null) {
          openStall = ev.t;
          stallCount += 1;
        } else flags.add("overlapping-stall");
        break;
      case "media-stall-end":
        if (openStall !== null) {
          totalStall += Math.max(0, ev.t - openStall);
          openStall = null;
        } else flags.add("orphan-stall-end");
        break;
      default:
        break;
    }
  }
  if (openStall !== null) {
    totalStall += Math.max(0, lastT - openStall);
    flags.add("unclosed-stall");
  }
  if (openPlay !== null) {
    playback += Math.max(0, lastT - openPlay);
    flags.add("unclosed-playback");
  }
  return { assetId, stallCount, totalStallMs: totalStall, playbackMs: playback,
           completed, flags: [...flags].sort() };
}

/**
 * Wire a media element's playback into the session event log. Returns the
 * detach function. Stall detection: `waiting` opens a stall interval and
 * `playing` closes it.
 */
export function attachMediaTelemetry(
  element: {
    addEventListener(type: string, listener: () => void): void;
    removeEventListener(type: string, listener: () => void): void;
  },
  assetId: string,
  record: (kind: string, payload: Record<string, string>) => void,
): () => void {
  let stalled = false;
  const handlers: Array<[string, () => void]> = [
    ["play", () => record("media-play", { asset_id: assetId })],
    ["pause", () => record("media-pause", { asset_id: assetId })],
    ["waiting", () => {
      if (!stalled) {
        stalled = true;
        record("media-stall-start", { asset_id: assetId });
      }
    }],
    ["playing", () => {
      if (stalled) {
        stalled = false;
        record("media-stall-end", { asset_id: assetId });
      }
    }],
    ["ended", () => record("media-ended", { asset_id: assetId })],
  ];
  for (const [type, listener] of handlers) element.addEventListener(type, listener);
  return () => {
    for (const [type, listener] of handlers) {
      element.removeEventListener(type, listener);
    }
  };
}
