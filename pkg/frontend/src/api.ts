/**
 * Typed client for the segment server's HTTP + JSON API.
 *
 * Byte accounting rule: the server counts the exact payload body length of
 * every /api/segment fetch made with a session parameter, so fetchSegment
 * reads the raw bytes first and reports their length alongside the parsed
 * document. Nothing else contributes to the byte counters on either side.
 */

import type { Intrinsics, Pose } from "./geometry";

export interface SegmentDescriptor {
  id: number;
  reference: number;
  members: number[];
  ref_bits: number;
  aux_bits: number;
}

export interface DomainInfo {
  rows: number;
  cols: number;
  delta: number;
  n_t: number;
  intrinsics: Intrinsics;
  poses: Pose[];
  popularity: number[];
  segments: SegmentDescriptor[];
}

export interface SegmentPayload {
  id: number;
  reference: {
    view: number;
    pose: Pose;
    width: number;
    height: number;
    color_b64: string;
    depth_b64: string;
  };
  aux: { id: number; pos: [number, number, number]; color: [number, number, number] }[];
  ref_bits: number;
  aux_bits: number;
}

export interface SessionStats {
  session: string;
  view: number;
  bytes: number;
  requests: number;
  segments: number;
  reports: number;
  delivered_ids: number[];
}

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
    this.name = "ApiError";
  }
}

async function errorOf(resp: Response): Promise<ApiError> {
  let detail = resp.statusText;
  try {
    const doc = await resp.json();
    if (doc && typeof doc.error === "string") detail = doc.error;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(detail, resp.status);
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async domain(): Promise<DomainInfo> {
    const resp = await fetch(this.url("/api/domain"));
    if (!resp.ok) throw await errorOf(resp);
    return (await resp.json()) as DomainInfo;
  }

  /** Report the session's view; returns segment ids to fetch (may be empty). */
  async reportPosition(session: string, view: number): Promise<number[]> {
    const resp = await fetch(this.url("/api/position"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ session, view }),
    });
    if (!resp.ok) throw await errorOf(resp);
    const doc = (await resp.json()) as { fetch: number[] };
    return doc.fetch;
  }

  async fetchSegment(
    session: string, segmentId: number,
  ): Promise<{ payload: SegmentPayload; bytes: number }> {
    const query = `?session=${encodeURIComponent(session)}`;
    const resp = await fetch(this.url(`/api/segment/${segmentId}${query}`));
    if (!resp.ok) throw await errorOf(resp);
    const raw = await resp.arrayBuffer();
    const payload = JSON.parse(new TextDecoder().decode(raw)) as SegmentPayload;
    return { payload, bytes: raw.byteLength };
  }

  async stats(session: string): Promise<SessionStats> {
    const resp = await fetch(this.url(`/api/stats?session=${encodeURIComponent(session)}`));
    if (!resp.ok) throw await errorOf(resp);
    const doc = (await resp.json()) as { session: SessionStats };
    return doc.session;
  }
}
