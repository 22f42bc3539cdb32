// Wire-format compatibility with the coordinator (golden frames generated
// by the collection side) plus client-side protocol behavior.

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { decodeMessage, encodeMessage, SyncClient, SyncMessage,
         SyncProtocolError } from "../src/sync.js";
import { CONFORMANCE_DIR } from "./vectors.js";

interface GoldenFrame {
  message: SyncMessage;
  frame_base64: string;
}

const golden: GoldenFrame[] = JSON.parse(
  readFileSync(join(CONFORMANCE_DIR, "sync_frames.json"), "utf-8")).frames;

describe("codec", () => {
  it("decodes every golden frame to the recorded message", () => {
    for (const entry of golden) {
      const frame = Buffer.from(entry.frame_base64, "base64").toString("utf-8");
      expect(decodeMessage(frame)).toEqual(entry.message);
    }
  });

  it("re-encodes every golden message to identical bytes", () => {
    for (const entry of golden) {
      const expected = Buffer.from(entry.frame_base64, "base64").toString("utf-8");
      expect(encodeMessage(entry.message)).toBe(expected);
    }
  });

  it("rejects truncated frames", () => {
    const frame = encodeMessage(golden[0].message);
    expect(() => decodeMessage(frame.slice(0, -2)))
      .toThrowError(SyncProtocolError);
  });

  it("rejects unknown kinds", () => {
    const body = JSON.stringify({ device_id: "d", kind: "jello", payload: {},
                                  seq: 1, session_group: "g" });
    expect(() => decodeMessage(`${body.length}:${body}`))
      .toThrowError(/unknown kind/);
  });
});

describe("client", () => {
  it("assigns strictly increasing sequence numbers from 1", () => {
    const client = new SyncClient("g", "d1");
    expect(client.hello().seq).toBe(1);
    expect(client.reportProgress("s0", "shown").seq).toBe(2);
    expect(client.reachBarrier("b").seq).toBe(3);
    expect(client.resumeRequest().seq).toBe(0); // out-of-band
    expect(client.sendCommand("*", "x").seq).toBe(4);
  });

  it("retransmits unacked messages in order and prunes on ack", () => {
    const client = new SyncClient("g", "d1");
    const m1 = client.hello();
    const m2 = client.reportProgress("s0", "shown");
    expect(client.pending()).toEqual([m1, m2]);
    client.onMessage({ session_group: "g", device_id: "", seq: 1, kind: "ack",
                       payload: { device_id: "d1", seq: 1 } });
    expect(client.pending()).toEqual([m2]);
  });

  it("merges progress by origin sequence, ignoring stale updates", () => {
    const client = new SyncClient("g", "d1");
    const fresh = { session_group: "g", device_id: "", seq: 5, kind: "progress",
                    payload: { device: "d2", screen_id: "s3", status: "shown",
                               origin_seq: 4 } };
    const stale = { session_group: "g", device_id: "", seq: 6, kind: "progress",
                    payload: { device: "d2", screen_id: "s1", status: "shown",
                               origin_seq: 2 } };
    client.onMessage(fresh);
    client.onMessage(stale);
    expect(client.view.get("d2")!.screen_id).toBe("s3");
  });

  it("applies a snapshot: view, barriers, and unacked pruning", () => {
    const client = new SyncClient("g", "d1");
    client.hello();
    client.reportProgress("s0", "shown");
    client.reportProgress("s1", "shown");
    client.onMessage({
      session_group: "g", device_id: "", seq: 9, kind: "state-snapshot",
      payload: {
        view: { d1: { screen_id: "s1", status: "shown", seq: 3 },
                d2: { screen_id: "s5", status: "shown", seq: 8 } },
        barriers_open: { b2: ["d2"] },
        barriers_released: ["b1"],
        last_seen: { d1: 2, d2: 8 },
      },
    });
    expect(client.barrierReleased("b1")).toBe(true);
    expect(client.view.get("d2")!.screen_id).toBe("s5");
    // seqs 1 and 2 acked via last_seen; seq 3 still needs retransmission
    expect(client.pending().map((m) => m.seq)).toEqual([3]);
  });

  it("applies duplicate commands only once", () => {
    const client = new SyncClient("g", "d1");
    const command = { session_group: "g", device_id: "", seq: 7, kind: "command",
                      payload: { command: "louder", from: "d2", origin_seq: 4 } };
    client.onMessage(command);
    client.onMessage(command);
    expect(client.commands).toEqual([{ from: "d2", command: "louder" }]);
  });
});
