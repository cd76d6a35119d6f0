/**
 * Cache, payload decoding, and HUD state tests on synthetic fixtures; no
 * server involved.
 */

import { describe, expect, it } from "vitest";
import type { DomainInfo, SegmentPayload } from "../src/api";
import { ClientCache, ProtocolError } from "../src/cache";
import { b64ToBytes, decodeSegment } from "../src/decode";
import { hudState } from "../src/hud";
import type { HudSource } from "../src/hud";

function b64Of(bytes: number[]): string {
  return btoa(String.fromCharCode(...bytes));
}

/** 8-view line split into two 4-view segments with references 1 and 5. */
function makeDomain(): DomainInfo {
  return {
    rows: 1,
    cols: 8,
    delta: 0.05,
    n_t: 2,
    intrinsics: { focal: 4, width: 2, height: 1, cx: 0.5, cy: 0 },
    poses: Array.from({ length: 8 }, (_, i) => [i * 0.05, 0, 0, 0, 0, 0] as const),
    popularity: new Array(8).fill(1 / 8),
    segments: [
      { id: 0, reference: 1, members: [0, 1, 2, 3], ref_bits: 10, aux_bits: 2 },
      { id: 1, reference: 5, members: [4, 5, 6, 7], ref_bits: 10, aux_bits: 2 },
    ],
  };
}

function makePayload(id: number, referenceView: number): SegmentPayload {
  return {
    id,
    reference: {
      view: referenceView,
      pose: [0, 0, 0, 0, 0, 0],
      width: 2,
      height: 1,
      color_b64: b64Of([1, 2, 3, 4, 5, 6]),
      depth_b64: b64Of([232, 3, 196, 9]), // 1000 mm, 2500 mm little-endian
    },
    aux: [{ id: 42, pos: [0.1, -0.2, 3.5], color: [7, 8, 9] }],
    ref_bits: 10,
    aux_bits: 2,
  };
}

describe("decodeSegment", () => {
  it("unpacks raw color bytes and millimeter depth", () => {
    const seg = decodeSegment(makePayload(0, 1));
    expect([...seg.color]).toEqual([1, 2, 3, 4, 5, 6]);
    expect([...seg.depth]).toEqual([1.0, 2.5]);
    expect([...seg.aux.ids]).toEqual([42]);
    expect([...seg.aux.positions]).toEqual([0.1, -0.2, 3.5]);
    expect([...seg.aux.colors]).toEqual([7, 8, 9]);
  });

  it("rejects planes whose size disagrees with the dimensions", () => {
    const bad = makePayload(0, 1);
    bad.reference.color_b64 = b64Of([1, 2, 3]);
    expect(() => decodeSegment(bad)).toThrow(/color plane/);
  });

  it("round-trips base64", () => {
    const bytes = Array.from({ length: 32 }, (_, i) => (i * 37) % 256);
    expect([...b64ToBytes(b64Of(bytes))]).toEqual(bytes);
  });
});

describe("ClientCache", () => {
  it("maps views to segments and guards undelivered renders", () => {
    const cache = new ClientCache(makeDomain());
    expect(cache.segmentIdOf(0)).toBe(0);
    expect(cache.segmentIdOf(4)).toBe(1);
    expect(cache.hasView(2)).toBe(false);
    expect(() => cache.segmentForView(2)).toThrow(ProtocolError);
    cache.add(decodeSegment(makePayload(0, 1)), 500);
    expect(cache.hasView(2)).toBe(true);
    expect(cache.segmentForView(2).id).toBe(0);
    expect(() => cache.segmentIdOf(8)).toThrow(RangeError);
  });

  it("accounts bytes and requests like the server does", () => {
    const cache = new ClientCache(makeDomain());
    cache.reports += 1;
    cache.add(decodeSegment(makePayload(0, 1)), 500);
    cache.reports += 1;
    cache.add(decodeSegment(makePayload(1, 5)), 700);
    expect(cache.bytes).toBe(1200);
    expect(cache.fetches).toBe(2);
    expect(cache.requests).toBe(4);
    expect(cache.deliveredIds()).toEqual([0, 1]);
  });

  it("rejects domain info with uncovered views", () => {
    const domain = makeDomain();
    domain.segments[1].members = [4, 5, 6];
    expect(() => new ClientCache(domain)).toThrow(ProtocolError);
  });
});

describe("hudState", () => {
  function sourceAt(view: number): { source: HudSource; cache: ClientCache } {
    const domain = makeDomain();
    const cache = new ClientCache(domain);
    cache.add(decodeSegment(makePayload(0, 1)), 500);
    cache.reports += 1;
    return {
      source: { domain, cache, view, status: "ready", lastError: null, lastFrame: null },
      cache,
    };
  }

  it("marks boundaries, references, deliveries, and the ball extent", () => {
    const { source } = sourceAt(2);
    const hud = hudState(source);
    expect(hud.view).toBe(2);
    expect(hud.segmentId).toBe(0);
    expect(hud.strip.filter((c) => c.startsSegment).map((c) => c.view)).toEqual([0, 4]);
    expect(hud.strip.filter((c) => c.isReference).map((c) => c.view)).toEqual([1, 5]);
    expect(hud.strip.filter((c) => c.delivered).map((c) => c.view)).toEqual([0, 1, 2, 3]);
    expect(hud.strip.filter((c) => c.inBall).map((c) => c.view)).toEqual([1, 2, 3]);
    expect(hud.strip.filter((c) => c.isCurrent).map((c) => c.view)).toEqual([2]);
  });

  it("mirrors the cache counters", () => {
    const { source, cache } = sourceAt(1);
    const hud = hudState(source);
    expect(hud.bytes).toBe(cache.bytes);
    expect(hud.requests).toBe(cache.requests);
    expect(hud.segmentsDelivered).toBe(1);
  });
});
