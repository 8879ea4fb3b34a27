/**
 * Polygon drafting and the quad wire encoding.
 *
 * Corners are click-ordered TL,TR,BR,BL and encode to the same
 * 8-comma-float string the CLI's --quad flag takes, so a quad copied out
 * of the UI drives the command line unchanged. The self-intersection
 * test replicates the service's orientation rule; the service stays
 * authoritative, this one only powers the inline warning.
 */

export interface Point {
  x: number;
  y: number;
}

export type Quad = readonly [Point, Point, Point, Point];

export function encodeQuad(corners: readonly Point[]): string {
  return corners.flatMap((p) => [p.x, p.y]).map(String).join(",");
}

export function decodeQuad(text: string): Quad {
  const parts = text.split(",").map(Number);
  if (parts.length !== 8 || parts.some((v) => !Number.isFinite(v))) {
    throw new Error(`quad needs 8 numbers, got ${JSON.stringify(text)}`);
  }
  const pts: Point[] = [];
  for (let i = 0; i < 8; i += 2) pts.push({ x: parts[i], y: parts[i + 1] });
  return pts as unknown as Quad;
}

function orient(p: Point, q: Point, r: Point): number {
  return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
}

export function properlyCross(a0: Point, a1: Point, b0: Point, b1: Point): boolean {
  const d1 = orient(a0, a1, b0);
  const d2 = orient(a0, a1, b1);
  const d3 = orient(b0, b1, a0);
  const d4 = orient(b0, b1, a1);
  return (d1 > 0) !== (d2 > 0) && (d3 > 0) !== (d4 > 0);
}

export function selfIntersects(corners: readonly Point[]): boolean {
  if (corners.length < 4) return false;
  const n = corners.length;
  for (let i = 0; i < n; i++) {
    for (let j = i + 1; j < n; j++) {
      if (j === i || (j + 1) % n === i || (i + 1) % n === j) continue;
      if (properlyCross(corners[i], corners[(i + 1) % n], corners[j], corners[(j + 1) % n])) {
        return true;
      }
    }
  }
  return false;
}

export const CORNER_LABELS = ["TL", "TR", "BR", "BL"] as const;

export class PolygonDraft {
  points: Point[] = [];

  /** Accepts the click while fewer than 4 corners are placed. */
  addPoint(p: Point): boolean {
    if (this.points.length >= 4) return false;
    this.points.push({ x: p.x, y: p.y });
    return true;
  }

  movePoint(index: number, p: Point): void {
    if (index < 0 || index >= this.points.length) {
      throw new Error(`no corner ${index} to move`);
    }
    this.points[index] = { x: p.x, y: p.y };
  }

  /** Index of the corner within radius of p, or -1. */
  hitCorner(p: Point, radius: number): number {
    for (let i = 0; i < this.points.length; i++) {
      const dx = this.points[i].x - p.x;
      const dy = this.points[i].y - p.y;
      if (dx * dx + dy * dy <= radius * radius) return i;
    }
    return -1;
  }

  get complete(): boolean {
    return this.points.length === 4;
  }

  get intersecting(): boolean {
    return this.complete && selfIntersects(this.points);
  }

  /** Why commit is blocked right now, or null when it may proceed. */
  blockReason(): string | null {
    if (!this.complete) {
      return `polygon needs 4 corners, has ${this.points.length}`;
    }
    if (this.intersecting) {
      return "polygon edges cross; drag a corner to untangle";
    }
    return null;
  }

  commit(): Quad {
    const reason = this.blockReason();
    if (reason) throw new Error(reason);
    return this.points.map((p) => ({ ...p })) as unknown as Quad;
  }

  reset(): void {
    this.points = [];
  }

  encoded(): string {
    return encodeQuad(this.points);
  }
}
