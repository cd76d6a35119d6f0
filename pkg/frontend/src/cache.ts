/**
 * Client-side segment cache and transfer accounting.
 *
 * The counters mirror the server's session counters exactly: one request per
 * position report and per segment fetch, and bytes equal to the payload body
 * lengths. At quiescence they must agree with GET /api/stats.
 */

import type { DomainInfo } from "./api";
import type { DecodedSegment } from "./decode";

export class ProtocolError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ProtocolError";
  }
}

export class ClientCache {
  private readonly segments = new Map<number, DecodedSegment>();
  private readonly segmentOfView: Int32Array;

  bytes = 0;
  reports = 0;
  fetches = 0;

  constructor(readonly domain: DomainInfo) {
    this.segmentOfView = new Int32Array(domain.poses.length).fill(-1);
    for (const seg of domain.segments) {
      for (const view of seg.members) this.segmentOfView[view] = seg.id;
    }
    for (let v = 0; v < this.segmentOfView.length; v++) {
      if (this.segmentOfView[v] < 0) {
        throw new ProtocolError(`domain info leaves view ${v} without a segment`);
      }
    }
  }

  get requests(): number {
    return this.reports + this.fetches;
  }

  segmentIdOf(view: number): number {
    if (view < 0 || view >= this.segmentOfView.length) {
      throw new RangeError(`view ${view} outside the domain`);
    }
    return this.segmentOfView[view];
  }

  hasSegment(id: number): boolean {
    return this.segments.has(id);
  }

  hasView(view: number): boolean {
    return this.segments.has(this.segmentIdOf(view));
  }

  add(segment: DecodedSegment, payloadBytes: number): void {
    this.segments.set(segment.id, segment);
    this.bytes += payloadBytes;
    this.fetches += 1;
  }

  /** The cached segment that renders the view; throws if undelivered. */
  segmentForView(view: number): DecodedSegment {
    const id = this.segmentIdOf(view);
    const seg = this.segments.get(id);
    if (seg === undefined) {
      throw new ProtocolError(`view ${view} needs segment ${id}, which is not delivered`);
    }
    return seg;
  }

  deliveredIds(): number[] {
    return [...this.segments.keys()].sort((a, b) => a - b);
  }
}
