/**
 * HUD state: telemetry numbers plus a one-cell-per-view domain strip with
 * segment boundaries, reference marks, delivery state, and the navigation
 * ball extent around the current view. Pure data; the DOM layer draws it.
 */

import type { DomainInfo } from "./api";
import type { ClientCache } from "./cache";
import type { Frame } from "./render";

/** What the HUD reads; NavigationSession satisfies this structurally. */
export interface HudSource {
  domain: DomainInfo;
  cache: ClientCache;
  view: number;
  status: string;
  lastError: string | null;
  lastFrame: Frame | null;
}

export interface StripCell {
  view: number;
  segmentId: number;
  isReference: boolean;
  /** First view of its segment along the strip (a boundary marker). */
  startsSegment: boolean;
  delivered: boolean;
  isCurrent: boolean;
  /** Inside the guaranteed navigation ball of the current view. */
  inBall: boolean;
}

export interface HudState {
  view: number;
  segmentId: number;
  bytes: number;
  requests: number;
  reports: number;
  segmentsDelivered: number;
  status: string;
  lastError: string | null;
  /** Fraction of the last frame's pixels that came from hole filling. */
  interpolatedFraction: number;
  rows: number;
  cols: number;
  strip: StripCell[];
}

/**
 * Chebyshev distance between two views on the grid, in steps. With the
 * domain's uniform spacing this matches the pose-space ball radius test
 * for every offset strictly below n_t.
 */
function stepDistance(a: number, b: number, cols: number): number {
  const dr = Math.abs(Math.floor(a / cols) - Math.floor(b / cols));
  const dc = Math.abs((a % cols) - (b % cols));
  return Math.max(dr, dc);
}

export function hudState(session: HudSource): HudState {
  const domain: DomainInfo = session.domain;
  const cache = session.cache;
  const frame = session.lastFrame;
  let interp = 0;
  if (frame) {
    let count = 0;
    for (let i = 0; i < frame.interpolated.length; i++) count += frame.interpolated[i];
    interp = count / frame.interpolated.length;
  }
  const size = domain.poses.length;
  const strip: StripCell[] = new Array(size);
  const references = new Set(domain.segments.map((s) => s.reference));
  let prevSegment = -1;
  for (let v = 0; v < size; v++) {
    const segId = cache.segmentIdOf(v);
    strip[v] = {
      view: v,
      segmentId: segId,
      isReference: references.has(v),
      startsSegment: v % domain.cols === 0 || segId !== prevSegment,
      delivered: cache.hasSegment(segId),
      isCurrent: v === session.view,
      inBall:
        session.view >= 0 &&
        stepDistance(v, session.view, domain.cols) < domain.n_t,
    };
    prevSegment = segId;
  }
  return {
    view: session.view,
    segmentId: session.view >= 0 ? cache.segmentIdOf(session.view) : -1,
    bytes: cache.bytes,
    requests: cache.requests,
    reports: cache.reports,
    segmentsDelivered: cache.deliveredIds().length,
    status: session.status,
    lastError: session.lastError,
    interpolatedFraction: interp,
    rows: domain.rows,
    cols: domain.cols,
    strip,
  };
}
