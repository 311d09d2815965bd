/**
 * Stroke capture and simplification.
 *
 * Pointer events arrive at display rate and a few seconds of drawing can
 * produce thousands of samples; the wire API wants a compact polyline that
 * still hugs the drawn curve. Ramer-Douglas-Peucker guarantees every
 * discarded sample stays within the chosen tolerance of the simplified
 * polyline.
 */

export interface Point {
  u: number;
  v: number;
}

export const MAX_STROKE_POINTS = 512;
export const DEFAULT_TOLERANCE_PX = 1.0;

/** Perpendicular distance from `p` to the segment [a, b]. */
export function segmentDistance(p: Point, a: Point, b: Point): number {
  const dx = b.u - a.u;
  const dy = b.v - a.v;
  const len2 = dx * dx + dy * dy;
  if (len2 === 0) {
    return Math.hypot(p.u - a.u, p.v - a.v);
  }
  let t = ((p.u - a.u) * dx + (p.v - a.v) * dy) / len2;
  t = Math.max(0, Math.min(1, t));
  return Math.hypot(p.u - (a.u + t * dx), p.v - (a.v + t * dy));
}

function rdp(points: Point[], first: number, last: number, tolerance: number, keep: boolean[]): void {
  let worst = -1;
  let worstDist = 0;
  for (let i = first + 1; i < last; i++) {
    const d = segmentDistance(points[i], points[first], points[last]);
    if (d > worstDist) {
      worstDist = d;
      worst = i;
    }
  }
  if (worst >= 0 && worstDist > tolerance) {
    keep[worst] = true;
    rdp(points, first, worst, tolerance, keep);
    rdp(points, worst, last, tolerance, keep);
  }
}

/** Drop exact consecutive duplicates (pointer events often repeat). */
export function dedupeConsecutive(points: Point[]): Point[] {
  const out: Point[] = [];
  for (const p of points) {
    const prev = out[out.length - 1];
    if (!prev || prev.u !== p.u || prev.v !== p.v) {
      out.push(p);
    }
  }
  return out;
}

/**
 * Simplify a raw stroke to at most `maxPoints` vertices.
 *
 * Starts at the default 1 px tolerance and widens it only if the point
 * budget is exceeded (pathological strokes); for hand-drawn input the
 * result stays within the default tolerance.
 */
export function simplifyStroke(
  raw: Point[],
  maxPoints: number = MAX_STROKE_POINTS,
  tolerance: number = DEFAULT_TOLERANCE_PX,
): Point[] {
  const points = dedupeConsecutive(raw);
  if (points.length <= 2) {
    return points.slice();
  }
  let eps = tolerance;
  for (;;) {
    const keep = new Array<boolean>(points.length).fill(false);
    keep[0] = true;
    keep[points.length - 1] = true;
    rdp(points, 0, points.length - 1, eps, keep);
    const out = points.filter((_, i) => keep[i]);
    if (out.length <= maxPoints) {
      return out;
    }
    eps *= 1.5;
  }
}

/** Largest distance from any raw sample to the simplified polyline. */
export function maxDeviation(raw: Point[], simplified: Point[]): number {
  if (simplified.length === 0) {
    return Infinity;
  }
  if (simplified.length === 1) {
    return Math.max(...raw.map((p) => Math.hypot(p.u - simplified[0].u, p.v - simplified[0].v)));
  }
  let worst = 0;
  for (const p of raw) {
    let best = Infinity;
    for (let i = 0; i + 1 < simplified.length; i++) {
      const d = segmentDistance(p, simplified[i], simplified[i + 1]);
      if (d < best) {
        best = d;
      }
    }
    worst = Math.max(worst, best);
  }
  return worst;
}

/** Accumulates pointer samples while the user draws. */
export class StrokeRecorder {
  private samples: Point[] = [];
  private active = false;

  begin(u: number, v: number): void {
    this.samples = [{ u, v }];
    this.active = true;
  }

  extend(u: number, v: number): void {
    if (this.active) {
      this.samples.push({ u, v });
    }
  }

  /** Finish the stroke and return the simplified polyline. */
  finish(): Point[] {
    this.active = false;
    return simplifyStroke(this.samples);
  }

  get isActive(): boolean {
    return this.active;
  }

  get sampleCount(): number {
    return this.samples.length;
  }
}
