// Answer values. Continuous answers are quantized to 1/10000 steps and
// rendered with integer math so every implementation writes the identical
// decimal string into exports.

export const CONTINUOUS_STEPS = 10000;

export type AnswerValue =
  | { type: "category"; index: number }
  | { type: "continuous"; steps: number }
  | { type: "text"; text: string }
  | { type: "image"; data_uri: string };

export function quantize(value: number): number {
  if (!(value >= 0 && value <= 1)) {
    throw new RangeError("continuous answers live in [0, 1]");
  }
  return Math.floor(value * CONTINUOUS_STEPS + 0.5);
}

export function continuous(value: number): AnswerValue {
  return { type: "continuous", steps: quantize(value) };
}

export function canonicalDecimal(steps: number): string {
  const whole = Math.floor(steps / CONTINUOUS_STEPS);
  const frac = steps % CONTINUOUS_STEPS;
  if (frac === 0) return String(whole);
  let digits = String(frac).padStart(4, "0");
  digits = digits.replace(/0+$/, "");
  return `${whole}.${digits}`;
}

/** The JSON object form used in CSV cells and conformance vectors. */
export function answerToJson(value: AnswerValue): Record<string, unknown> {
  switch (value.type) {
    case "category":
      return { type: "category", index: value.index };
    case "continuous":
      return { type: "continuous", value: canonicalDecimal(value.steps) };
    case "text":
      return { type: "text", text: value.text };
    case "image":
      return { type: "image", data_uri: value.data_uri };
  }
}

export function answerFromJson(doc: Record<string, unknown>): AnswerValue {
  switch (doc.type) {
    case "category":
      return { type: "category", index: Number(doc.index) };
    case "continuous":
      return continuous(Number(doc.value));
    case "text":
      return { type: "text", text: String(doc.text) };
    case "image":
      return { type: "image", data_uri: String(doc.data_uri) };
    default:
      throw new Error(`unknown answer type ${String(doc.type)}`);
  }
}

/** Primitive used by routing comparisons; images are not comparable. */
export function comparable(value: AnswerValue): number | string | null {
  switch (value.type) {
    case "category":
      return value.index;
    case "continuous":
      return value.steps / CONTINUOUS_STEPS;
    case "text":
      return value.text;
    case "image":
      return null;
  }
}
