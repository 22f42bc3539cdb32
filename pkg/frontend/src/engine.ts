// Client-side port of the session state machine. Kept conformant with the
// reference engine by the shared vector suite in ../conformance; change
// semantics only together with the vectors.

import type { Condition, ItemSpec, QuestionnaireDoc, ScreenSpec } from "./spec.js";
import { AnswerValue, comparable } from "./answers.js";

export const NON_MONOTONIC_FLAG = "non-monotonic";

export interface BehavioralEvent {
  kind: string;
  t: number;
  payload: Record<string, string>;
  flags: string[]; // kept sorted
}

export class EngineError extends Error {
  constructor(public code: string, message: string) {
    super(message);
  }
}

export interface SessionOptions {
  sessionId?: string;
  wallclockMs?: number;
}

export class Session {
  readonly spec: QuestionnaireDoc;
  sessionId: string;
  participantId: string;
  seed: number;
  status: "in_progress" | "completed" | "aborted";
  cursor: number;
  answers = new Map<string, AnswerValue>();
  revisions = new Map<string, number>();
  answerTimes = new Map<string, number>();
  events: BehavioralEvent[] = [];
  screenEntryTimes = new Map<string, number>();
  startedWallclockMs: number;

  constructor(spec: QuestionnaireDoc, participantId: string, seed: number,
              options: SessionOptions = {}) {
    this.spec = spec;
    this.sessionId = options.sessionId ?? randomId();
    this.participantId = participantId;
    this.seed = seed;
    this.status = "in_progress";
    this.cursor = 0;
    this.startedWallclockMs = options.wallclockMs ?? Date.now();
    const first = spec.screens[0];
    this.screenEntryTimes.set(first.screen_id, 0);
    this.appendEvent({ kind: "screen-shown", t: 0,
                       payload: { screen_id: first.screen_id }, flags: [] });
  }

  activeScreen(): ScreenSpec {
    return this.spec.screens[this.cursor];
  }

  private requireActive(): void {
    if (this.status !== "in_progress") {
      throw new EngineError("SESSION_NOT_ACTIVE",
                            `session is ${this.status}, not in_progress`);
    }
  }

  private appendEvent(event: BehavioralEvent): void {
    const last = this.events[this.events.length - 1];
    if (last !== undefined && event.t < last.t
        && !event.flags.includes(NON_MONOTONIC_FLAG)) {
      event = { ...event, flags: [...event.flags, NON_MONOTONIC_FLAG].sort() };
    }
    this.events.push(event);
  }

  submitAnswer(itemId: string, value: AnswerValue, at: number): void {
    this.requireActive();
    const screen = this.activeScreen();
    if (screen.kind !== "items" || !screen.items) {
      throw new EngineError("ITEM_NOT_ON_ACTIVE_SCREEN",
                            `active screen '${screen.screen_id}' has no items`);
    }
    const item = screen.items.find((i) => i.item_id === itemId);
    if (item === undefined) {
      throw new EngineError("ITEM_NOT_ON_ACTIVE_SCREEN",
                            `item '${itemId}' is not on screen '${screen.screen_id}'`);
    }
    checkValue(item, value);
    this.answers.set(itemId, value);
    const revision = (this.revisions.get(itemId) ?? 0) + 1;
    this.revisions.set(itemId, revision);
    this.answerTimes.set(itemId, at);
    this.appendEvent({
      kind: "answer-changed", t: at,
      payload: { item_id: itemId, screen_id: screen.screen_id,
                 revision: String(revision) },
      flags: [],
    });
  }

  recordEvent(kind: string, at: number, payload: Record<string, string> = {}): void {
    this.requireActive();
    this.appendEvent({ kind, t: at, payload, flags: [] });
  }

  screenReady(at: number): boolean {
    if (this.status !== "in_progress") return false;
    const screen = this.activeScreen();
    if (screen.kind === "items") {
      return (screen.items ?? []).every(
        (item) => !item.required || this.answers.has(item.item_id));
    }
    if (screen.kind === "wait") {
      const entered = this.screenEntryTimes.get(screen.screen_id) ?? 0;
      return at - entered >= (screen.duration_ms ?? 0);
    }
    if (screen.kind === "media") {
      if (!(screen.autoplay ?? true)) return true;
      const entered = this.screenEntryTimes.get(screen.screen_id) ?? 0;
      return this.events.some(
        (e) => e.kind === "media-ended"
          && e.payload.asset_id === screen.asset_id && e.t >= entered);
    }
    return true; // export and remote_command screens never block
  }

  advance(at: number): void {
    this.requireActive();
    if (!this.screenReady(at)) {
      throw new EngineError("NOT_READY", "active screen still blocks advancing");
    }
    const screen = this.activeScreen();
    this.appendEvent({ kind: "screen-completed", t: at,
                       payload: { screen_id: screen.screen_id }, flags: [] });
    const target = route(this.spec, screen.screen_id, this.answers);
    const nextIndex = target === null
      ? this.cursor + 1
      : this.spec.screens.findIndex((s) => s.screen_id === target);
    if (nextIndex >= this.spec.screens.length) {
      this.status = "completed";
      return;
    }
    this.cursor = nextIndex;
    const shown = this.spec.screens[nextIndex];
    this.screenEntryTimes.set(shown.screen_id, at);
    this.appendEvent({ kind: "screen-shown", t: at,
                       payload: { screen_id: shown.screen_id }, flags: [] });
  }

  abort(): void {
    this.requireActive();
    this.status = "aborted";
  }
}

export function createSession(spec: QuestionnaireDoc, participantId: string,
                              seed: number,
                              options: SessionOptions = {}): Session {
  return new Session(spec, participantId, seed, options);
}

function randomId(): string {
  const bytes = new Uint8Array(16);
  crypto.getRandomValues(bytes);
  return Array.from(bytes, (b) => b.toString(16).padStart(2, "0")).join("");
}

function checkValue(item: ItemSpec, value: AnswerValue): void {
  const scale = item.scale;
  const fail = (message: string) => {
    throw new EngineError("TYPE_MISMATCH", message);
  };
  switch (scale.variant) {
    case "category_rating":
      if (value.type !== "category") fail(`item '${item.item_id}' takes a category answer`);
      else if (!(value.index >= 0 && value.index < (scale.labels ?? []).length
                 && Number.isInteger(value.index))) {
        fail(`category index ${value.index} out of range`);
      }
      break;
    case "free_text":
      if (value.type !== "text") fail(`item '${item.item_id}' takes a text answer`);
      else if (value.text.length > (scale.max_length ?? 1000)) {
        fail(`text exceeds max_length ${scale.max_length}`);
      }
      break;
    case "free_hand":
      if (value.type !== "image") fail(`item '${item.item_id}' takes an image answer`);
      else if (!value.data_uri.startsWith("data:")) {
        fail("image answers must be data: URIs");
      }
      break;
    default:
      if (value.type !== "continuous") {
        fail(`item '${item.item_id}' takes a continuous answer`);
      }
  }
}

function sameKind(a: number | string, b: number | string): boolean {
  if (typeof a === "number" && typeof b === "number") return true;
  return typeof a === "string" && typeof b === "string";
}

export function conditionHolds(cond: Condition,
                               answers: Map<string, AnswerValue>): boolean {
  const answer = answers.get(cond.item_id);
  if (cond.comparator === "answered") return answer !== undefined;
  if (cond.comparator === "unanswered") return answer === undefined;
  if (answer === undefined) return false;
  const value = comparable(answer);
  const literal = cond.literal;
  if (value === null || literal === null || literal === undefined) return false;
  switch (cond.comparator) {
    case "eq":
      return sameKind(value, literal) && value === literal;
    case "ne":
      return !(sameKind(value, literal) && value === literal);
  }
  if (!sameKind(value, literal)) return false;
  switch (cond.comparator) {
    case "lt":
      return value < literal;
    case "le":
      return value <= literal;
    case "gt":
      return value > literal;
    default:
      return value >= literal;
  }
}

export function route(spec: QuestionnaireDoc, afterScreen: string,
                      answers: Map<string, AnswerValue>): string | null {
  let best: { priority: number; target: string } | null = null;
  for (const rule of spec.routing ?? []) {
    if (rule.after_screen !== afterScreen) continue;
    if (best !== null && rule.priority <= best.priority) continue;
    if (conditionHolds(rule.condition, answers)) {
      best = { priority: rule.priority, target: rule.goto_screen };
    }
  }
  return best === null ? null : best.target;
}
