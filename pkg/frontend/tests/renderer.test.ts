/**
 * Renderer unit tests on a hand-built segment: identity warp, z-ordering of
 * auxiliary voxels against the warped reference, and hole filling.
 */

import { describe, expect, it } from "vitest";
import type { Intrinsics, Pose } from "../src/geometry";
import { backprojectPixel, projectPoint, rotationMatrix } from "../src/geometry";
import type { DecodedSegment } from "../src/decode";
import { renderView } from "../src/render";

const POSE: Pose = [0, 0, 0, 0, 0, 0];
const INTR: Intrinsics = { focal: 4, width: 4, height: 4, cx: 1.5, cy: 1.5 };

/** 4x4 reference at flat depth 2 m with per-pixel unique colors. */
function makeSegment(overrides: Partial<DecodedSegment> = {}): DecodedSegment {
  const n = 16;
  const color = new Uint8Array(n * 3);
  const depth = new Float64Array(n).fill(2.0);
  for (let i = 0; i < n; i++) {
    color[3 * i] = 10 + i;
    color[3 * i + 1] = 100 + i;
    color[3 * i + 2] = 200 + i;
  }
  return {
    id: 0,
    referenceView: 0,
    pose: POSE,
    width: 4,
    height: 4,
    color,
    depth,
    aux: { ids: new Int32Array(0), positions: new Float64Array(0), colors: new Uint8Array(0) },
    refBits: 0,
    auxBits: 0,
    ...overrides,
  };
}

/** World position that projects to the center of a given pixel at depth z. */
function worldAtPixel(px: number, py: number, z: number): [number, number, number] {
  return backprojectPixel(px, py, z, rotationMatrix(POSE), POSE, INTR);
}

function auxOf(points: { pos: [number, number, number]; color: [number, number, number] }[]) {
  const ids = new Int32Array(points.length);
  const positions = new Float64Array(points.length * 3);
  const colors = new Uint8Array(points.length * 3);
  points.forEach((p, i) => {
    ids[i] = 1000 + i;
    positions.set(p.pos, 3 * i);
    colors.set(p.color, 3 * i);
  });
  return { ids, positions, colors };
}

describe("projection round trip", () => {
  it("lands a back-projected pixel center on the same pixel", () => {
    const r = rotationMatrix(POSE);
    for (let py = 0; py < 4; py++) {
      for (let px = 0; px < 4; px++) {
        const [x, y, z] = backprojectPixel(px, py, 1.7, r, POSE, INTR);
        expect(projectPoint(x, y, z, r, POSE, INTR).pix).toBe(py * 4 + px);
      }
    }
  });

  it("rejects points behind the camera and outside the frame", () => {
    const r = rotationMatrix(POSE);
    expect(projectPoint(0, 0, -1, r, POSE, INTR).pix).toBe(-1);
    expect(projectPoint(50, 0, 2, r, POSE, INTR).pix).toBe(-1);
  });
});

describe("renderView", () => {
  it("is the identity at the reference pose", () => {
    const seg = makeSegment();
    const frame = renderView(seg, POSE, INTR);
    expect(frame.rgb).toEqual(seg.color);
    expect(frame.interpolated.every((v) => v === 0)).toBe(true);
    expect(frame.unfilled).toBe(0);
  });

  it("lets a nearer auxiliary voxel win its pixel", () => {
    const seg = makeSegment({
      aux: auxOf([{ pos: worldAtPixel(1, 1, 1.0), color: [9, 9, 9] }]),
    });
    const frame = renderView(seg, POSE, INTR);
    const i = 1 * 4 + 1;
    expect([frame.rgb[3 * i], frame.rgb[3 * i + 1], frame.rgb[3 * i + 2]]).toEqual([9, 9, 9]);
    expect(frame.depth[i]).toBe(1.0);
  });

  it("keeps the reference over a farther or tied auxiliary voxel", () => {
    const seg = makeSegment({
      aux: auxOf([
        { pos: worldAtPixel(1, 1, 3.0), color: [9, 9, 9] },
        { pos: worldAtPixel(2, 2, 2.0), color: [7, 7, 7] },
      ]),
    });
    const frame = renderView(seg, POSE, INTR);
    expect(frame.rgb).toEqual(seg.color);
  });

  it("fills a hole from its nearest filled neighbor and marks it", () => {
    const seg = makeSegment();
    const hole = 1 * 4 + 1;
    seg.depth[hole] = 0; // empty reference pixel leaves a hole after warping
    const frame = renderView(seg, POSE, INTR);
    const west = 1 * 4 + 0;
    expect([frame.rgb[3 * hole], frame.rgb[3 * hole + 1], frame.rgb[3 * hole + 2]]).toEqual([
      seg.color[3 * west], seg.color[3 * west + 1], seg.color[3 * west + 2],
    ]);
    expect(frame.interpolated[hole]).toBe(1);
    expect(frame.interpolated.reduce((a, b) => a + b, 0)).toBe(1);
    expect(frame.unfilled).toBe(0);
  });

  it("closes wide holes by repeated dilation", () => {
    const seg = makeSegment();
    for (let i = 0; i < 16; i++) seg.depth[i] = 0;
    seg.depth[0] = 2.0; // single survivor in a corner
    const frame = renderView(seg, POSE, INTR);
    expect(frame.unfilled).toBe(0);
    for (let i = 1; i < 16; i++) {
      expect(frame.interpolated[i]).toBe(1);
      expect(frame.rgb[3 * i]).toBe(seg.color[0]);
    }
  });

  it("reports unfilled pixels when the frame is entirely empty", () => {
    const seg = makeSegment();
    for (let i = 0; i < 16; i++) seg.depth[i] = 0;
    const frame = renderView(seg, POSE, INTR);
    expect(frame.unfilled).toBe(16);
  });
});
