/**
 * Client-side view synthesis from one cached segment.
 *
 * Mirrors the server-side decoder: back-project every occupied reference
 * pixel with its depth, re-project into the requested pose, splat through a
 * z-buffer (reference points first, then auxiliary voxels, so depth ties
 * keep the reference), then close holes by one-pixel dilation repeated as
 * neighbor fill. No patch inpainting.
 */

import type { Intrinsics, Pose } from "./geometry";
import { backprojectPixel, projectPoint, rotationMatrix } from "./geometry";
import type { DecodedSegment } from "./decode";

export interface Frame {
  width: number;
  height: number;
  /** Interleaved RGB. */
  rgb: Uint8Array;
  /** Camera-frame depth per pixel; Infinity where nothing landed. */
  depth: Float64Array;
  /** 1 where the color came from hole filling instead of a splat. */
  interpolated: Uint8Array;
  /** Pixels that stayed empty after filling (fully empty frames only). */
  unfilled: number;
}

const NEIGHBORS: ReadonlyArray<readonly [number, number]> = [
  [0, -1], [0, 1], [-1, 0], [1, 0],
  [-1, -1], [-1, 1], [1, -1], [1, 1],
];

export function renderView(
  segment: DecodedSegment, targetPose: Pose, intr: Intrinsics,
): Frame {
  const { width, height } = intr;
  const n = width * height;
  const rgb = new Uint8Array(n * 3);
  const depth = new Float64Array(n).fill(Infinity);
  const interpolated = new Uint8Array(n);

  const refR = rotationMatrix(segment.pose);
  const tgtR = rotationMatrix(targetPose);

  const splat = (x: number, y: number, z: number, r: number, g: number, b: number) => {
    const proj = projectPoint(x, y, z, tgtR, targetPose, intr);
    if (proj.pix < 0 || proj.depth >= depth[proj.pix]) return;
    depth[proj.pix] = proj.depth;
    rgb[proj.pix * 3] = r;
    rgb[proj.pix * 3 + 1] = g;
    rgb[proj.pix * 3 + 2] = b;
  };

  for (let py = 0; py < segment.height; py++) {
    for (let px = 0; px < segment.width; px++) {
      const i = py * segment.width + px;
      const z = segment.depth[i];
      if (z <= 0) continue;
      const [wx, wy, wz] = backprojectPixel(px, py, z, refR, segment.pose, intr);
      splat(wx, wy, wz, segment.color[3 * i], segment.color[3 * i + 1], segment.color[3 * i + 2]);
    }
  }

  const aux = segment.aux;
  for (let i = 0; i < aux.ids.length; i++) {
    splat(
      aux.positions[3 * i], aux.positions[3 * i + 1], aux.positions[3 * i + 2],
      aux.colors[3 * i], aux.colors[3 * i + 1], aux.colors[3 * i + 2],
    );
  }

  const unfilled = fillHoles(rgb, depth, interpolated, width, height);
  return { width, height, rgb, depth, interpolated, unfilled };
}

/**
 * Dilate occupied pixels into empty ones, repeating until stable. Each empty
 * pixel takes the nearest (smallest-depth) occupied neighbor of the previous
 * pass, so filling is deterministic and fronts advance one pixel per pass.
 * Returns the number of pixels still empty (nonzero only when no splat
 * landed anywhere).
 */
export function fillHoles(
  rgb: Uint8Array, depth: Float64Array, interpolated: Uint8Array,
  width: number, height: number,
): number {
  let empty: number[] = [];
  for (let i = 0; i < depth.length; i++) {
    if (depth[i] === Infinity) empty.push(i);
  }
  while (empty.length > 0) {
    const occupiedBefore = depth.slice();
    const still: number[] = [];
    let progress = false;
    for (const i of empty) {
      const px = i % width;
      const py = (i - px) / width;
      let best = -1;
      let bestDepth = Infinity;
      for (const [dy, dx] of NEIGHBORS) {
        const nx = px + dx;
        const ny = py + dy;
        if (nx < 0 || nx >= width || ny < 0 || ny >= height) continue;
        const j = ny * width + nx;
        if (occupiedBefore[j] < bestDepth) {
          bestDepth = occupiedBefore[j];
          best = j;
        }
      }
      if (best < 0) {
        still.push(i);
        continue;
      }
      rgb[3 * i] = rgb[3 * best];
      rgb[3 * i + 1] = rgb[3 * best + 1];
      rgb[3 * i + 2] = rgb[3 * best + 2];
      depth[i] = bestDepth;
      interpolated[i] = 1;
      progress = true;
    }
    if (!progress) break;
    empty = still;
  }
  return empty.length;
}
