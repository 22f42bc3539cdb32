// Free-hand stroke capture from pointer events, downsampled to at most
// 240 points per second per stroke; coordinates clamp to the canvas.

export interface StrokePoint {
  x: number;
  y: number;
  t: number;
}

export const MAX_POINTS_PER_SECOND = 240;
const MIN_INTERVAL_MS = 1000 / MAX_POINTS_PER_SECOND;

export class StrokeRecorder {
  strokes: StrokePoint[][] = [];
  private current: StrokePoint[] | null = null;
  private lastT = -Infinity;

  constructor(readonly widthPx: number, readonly heightPx: number) {}

  private clampPoint(x: number, y: number, t: number): StrokePoint {
    return {
      x: Math.min(Math.max(x, 0), this.widthPx - 0.001),
      y: Math.min(Math.max(y, 0), this.heightPx - 0.001),
      t,
    };
  }

  begin(x: number, y: number, t: number): void {
    this.current = [this.clampPoint(x, y, t)];
    this.lastT = t;
  }

  move(x: number, y: number, t: number): void {
    if (this.current === null) return;
    if (t - this.lastT < MIN_INTERVAL_MS) return; // downsample
    if (t < this.lastT) return; // per-stroke timestamps must not decrease
    this.current.push(this.clampPoint(x, y, t));
    this.lastT = t;
  }

  end(x: number, y: number, t: number): void {
    if (this.current === null) return;
    const point = this.clampPoint(x, y, Math.max(t, this.lastT));
    const last = this.current[this.current.length - 1];
    if (point.x !== last.x || point.y !== last.y) this.current.push(point);
    this.strokes.push(this.current);
    this.current = null;
  }

  clear(): void {
    this.strokes = [];
    this.current = null;
    this.lastT = -Infinity;
  }

  isEmpty(): boolean {
    return this.strokes.length === 0 && this.current === null;
  }
}
