// Graphical scale calibration. Every scale SVG (built-in or custom)
// carries data-anchor-min-x / data-anchor-max-x / data-anchor-y on its
// root element, in viewBox coordinates; the answer is the clamped linear
// position of the participant's mark between the two anchors.

export interface Anchors {
  minX: number;
  maxX: number;
  y: number;
}

export function parseAnchors(svgText: string): Anchors {
  const read = (name: string): number => {
    const match = svgText.match(new RegExp(`${name}="([0-9.+-]+)"`));
    if (match === null) {
      throw new Error(`scale SVG is missing ${name} calibration`);
    }
    return Number(match[1]);
  };
  return {
    minX: read("data-anchor-min-x"),
    maxX: read("data-anchor-max-x"),
    y: read("data-anchor-y"),
  };
}

export function positionToValue(x: number, anchors: Anchors): number {
  if (anchors.maxX === anchors.minX) return 0;
  const raw = (x - anchors.minX) / (anchors.maxX - anchors.minX);
  return Math.min(1, Math.max(0, raw));
}

export function parseViewBox(svgText: string): { width: number; height: number } {
  const match = svgText.match(/viewBox="0 0 ([0-9.]+) ([0-9.]+)"/);
  if (match === null) throw new Error("scale SVG has no viewBox");
  return { width: Number(match[1]), height: Number(match[2]) };
}

/**
 * Map a click inside the rendered SVG element to the answer value,
 * accounting for the element being displayed at a different size than
 * its viewBox.
 */
export function clickToValue(clientX: number, rect: { left: number; width: number },
                             svgText: string): number {
  const viewBox = parseViewBox(svgText);
  const anchors = parseAnchors(svgText);
  const xInViewBox = ((clientX - rect.left) / rect.width) * viewBox.width;
  return positionToValue(xInViewBox, anchors);
}
