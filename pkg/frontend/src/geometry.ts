/**
 * Pinhole camera math shared by the renderer and the HUD.
 *
 * Conventions match the segment server: poses are [tx, ty, tz, rx, ry, rz]
 * with rotation Rz(rz) @ Ry(ry) @ Rx(rx) mapping camera to world; with zero
 * rotation the camera looks along world +z, +x is image right, +y is image
 * down. Pixels quantize as floor(u + 0.5), so halves round up.
 */

export type Pose = readonly [number, number, number, number, number, number];

export interface Intrinsics {
  focal: number;
  width: number;
  height: number;
  cx: number;
  cy: number;
}

/** Row-major 3x3 camera-to-world rotation matrix. */
export function rotationMatrix(pose: Pose): Float64Array {
  const [, , , rx, ry, rz] = pose;
  const cx = Math.cos(rx), sx = Math.sin(rx);
  const cy = Math.cos(ry), sy = Math.sin(ry);
  const cz = Math.cos(rz), sz = Math.sin(rz);
  // Rz @ Ry @ Rx, expanded
  return new Float64Array([
    cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx,
    sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx,
    -sy, cy * sx, cy * cx,
  ]);
}

export interface Projection {
  /** Flat pixel index py * width + px, or -1 when invalid. */
  pix: number;
  /** Camera-frame z; meaningful only when pix >= 0. */
  depth: number;
}

/**
 * Project one world point. r is the camera-to-world rotation of the pose;
 * world-to-camera applies its transpose.
 */
export function projectPoint(
  x: number, y: number, z: number,
  r: Float64Array, pose: Pose, intr: Intrinsics,
): Projection {
  const dx = x - pose[0];
  const dy = y - pose[1];
  const dz = z - pose[2];
  const xc = r[0] * dx + r[3] * dy + r[6] * dz;
  const yc = r[1] * dx + r[4] * dy + r[7] * dz;
  const zc = r[2] * dx + r[5] * dy + r[8] * dz;
  if (!(zc > 0)) return { pix: -1, depth: zc };
  const px = Math.floor((intr.focal * xc) / zc + intr.cx + 0.5);
  const py = Math.floor((intr.focal * yc) / zc + intr.cy + 0.5);
  if (px < 0 || px >= intr.width || py < 0 || py >= intr.height) {
    return { pix: -1, depth: zc };
  }
  return { pix: py * intr.width + px, depth: zc };
}

/** World position of the point seen at pixel (px, py) at the given depth. */
export function backprojectPixel(
  px: number, py: number, depth: number,
  r: Float64Array, pose: Pose, intr: Intrinsics,
): [number, number, number] {
  const xc = ((px - intr.cx) * depth) / intr.focal;
  const yc = ((py - intr.cy) * depth) / intr.focal;
  return [
    r[0] * xc + r[1] * yc + r[2] * depth + pose[0],
    r[3] * xc + r[4] * yc + r[5] * depth + pose[1],
    r[6] * xc + r[7] * yc + r[8] * depth + pose[2],
  ];
}
