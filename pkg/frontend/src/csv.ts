// CSV export, byte-identical with the reference implementation.
//
// Dialect: comma delimiter, double-quote quoting with quote doubling, LF
// row terminator; a cell is quoted exactly when it contains a comma, a
// double quote, CR, or LF. Structured cells are canonical JSON: keys
// sorted, no spaces, non-ASCII kept raw (the document is UTF-8).

import type { Session } from "./engine.js";
import { answerToJson } from "./answers.js";
import { allItems } from "./spec.js";

export const HEADER = ["session_id", "participant_id", "spec_id", "spec_version",
                       "kind", "key", "value", "t_ms"];

export function canonicalJson(value: unknown): string {
  if (value === null) return "null";
  if (Array.isArray(value)) {
    return `[${value.map(canonicalJson).join(",")}]`;
  }
  if (typeof value === "object") {
    const entries = Object.entries(value as Record<string, unknown>)
      .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
      .map(([k, v]) => `${JSON.stringify(k)}:${canonicalJson(v)}`);
    return `{${entries.join(",")}}`;
  }
  return JSON.stringify(value);
}

export function cell(value: string): string {
  if (/[",\r\n]/.test(value)) {
    return `"${value.replaceAll('"', '""')}"`;
  }
  return value;
}

export function writeRows(rows: string[][]): string {
  if (rows.length === 0) return "";
  return rows.map((row) => row.map(cell).join(",")).join("\n") + "\n";
}

export function sessionRows(session: Session): string[][] {
  const base = [session.sessionId, session.participantId,
                session.spec.spec_id, session.spec.version];
  const rows: string[][] = [
    [...base, "meta", "seed", String(session.seed), ""],
    [...base, "meta", "status", session.status, ""],
    [...base, "meta", "started_wallclock_ms",
     String(session.startedWallclockMs), ""],
  ];
  for (const item of allItems(session.spec)) {
    const value = session.answers.get(item.item_id);
    if (value === undefined) continue;
    const doc = answerToJson(value);
    doc.revisions = session.revisions.get(item.item_id) ?? 1;
    rows.push([...base, "answer", item.item_id, canonicalJson(doc),
               String(session.answerTimes.get(item.item_id) ?? 0)]);
  }
  for (const event of session.events) {
    rows.push([...base, "event", event.kind,
               canonicalJson({ payload: event.payload,
                               flags: [...event.flags].sort() }),
               String(event.t)]);
  }
  return rows;
}

export function toCsvText(session: Session): string {
  return writeRows([HEADER, ...sessionRows(session)]);
}

export function toCsvBytes(session: Session): Uint8Array {
  return new TextEncoder().encode(toCsvText(session));
}
