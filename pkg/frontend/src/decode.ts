/**
 * Decoding of segment payloads into render-ready typed arrays.
 *
 * The reference color arrives as raw interleaved RGB bytes and depth as
 * little-endian uint16 millimeters; both are base64 inside the JSON payload.
 */

import type { SegmentPayload } from "./api";
import type { Pose } from "./geometry";

export interface DecodedSegment {
  id: number;
  referenceView: number;
  pose: Pose;
  width: number;
  height: number;
  /** Interleaved RGB, length width * height * 3. */
  color: Uint8Array;
  /** Depth in meters, length width * height; 0 marks an empty pixel. */
  depth: Float64Array;
  aux: {
    ids: Int32Array;
    positions: Float64Array; // (n, 3) flattened
    colors: Uint8Array; // (n, 3) flattened
  };
  refBits: number;
  auxBits: number;
}

export function b64ToBytes(b64: string): Uint8Array {
  const bin = atob(b64);
  const out = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
  return out;
}

export function decodeSegment(payload: SegmentPayload): DecodedSegment {
  const { width, height } = payload.reference;
  const color = b64ToBytes(payload.reference.color_b64);
  if (color.length !== width * height * 3) {
    throw new Error(`color plane is ${color.length} bytes, expected ${width * height * 3}`);
  }
  const mm = b64ToBytes(payload.reference.depth_b64);
  if (mm.length !== width * height * 2) {
    throw new Error(`depth plane is ${mm.length} bytes, expected ${width * height * 2}`);
  }
  const depth = new Float64Array(width * height);
  for (let i = 0; i < depth.length; i++) {
    depth[i] = (mm[2 * i] | (mm[2 * i + 1] << 8)) / 1000.0;
  }
  const n = payload.aux.length;
  const ids = new Int32Array(n);
  const positions = new Float64Array(n * 3);
  const colors = new Uint8Array(n * 3);
  for (let i = 0; i < n; i++) {
    const rec = payload.aux[i];
    ids[i] = rec.id;
    positions[3 * i] = rec.pos[0];
    positions[3 * i + 1] = rec.pos[1];
    positions[3 * i + 2] = rec.pos[2];
    colors[3 * i] = rec.color[0];
    colors[3 * i + 1] = rec.color[1];
    colors[3 * i + 2] = rec.color[2];
  }
  return {
    id: payload.id,
    referenceView: payload.reference.view,
    pose: payload.reference.pose,
    width,
    height,
    color,
    depth,
    aux: { ids, positions, colors },
    refBits: payload.ref_bits,
    auxBits: payload.aux_bits,
  };
}
