/**
 * Navigation session: movement, position reports, prefetch, and rendering.
 *
 * Protocol contract: report the position every `reportPeriod` successful
 * moves (default: the server's N_T) and fetch every listed segment before
 * the move completes. Under that cadence every view within the navigation
 * ball is delivered before it can be reached, so rendering an undelivered
 * view is a protocol violation and throws instead of guessing.
 *
 * Moves are serialized through an internal promise chain: a move that
 * triggers network fetches blocks later moves until the data landed
 * (explicit pending state, no concurrent cache mutation).
 */

import { ApiClient } from "./api";
import type { DomainInfo } from "./api";
import { ClientCache, ProtocolError } from "./cache";
import { decodeSegment } from "./decode";
import type { Frame } from "./render";
import { renderView } from "./render";

export type Direction = "left" | "right" | "up" | "down";

export interface MoveResult {
  moved: boolean;
  view: number;
  /** Why the move did not happen: domain edge, or a sticky fetch error. */
  blocked?: "edge" | "error";
  fetched: number[];
}

export interface SessionHooks {
  /** Every completed render, after the cache guard passed. */
  onRender?: (view: number, segmentId: number) => void;
  /** Every position report, with the ids the server listed. */
  onReport?: (view: number, fetch: number[]) => void;
  /** Every stored segment payload. */
  onFetch?: (segmentId: number, bytes: number) => void;
  onStateChange?: () => void;
}

export interface SessionOptions {
  sessionId?: string;
  /** Moves between position reports; defaults to the server's N_T. */
  reportPeriod?: number;
  hooks?: SessionHooks;
}

function randomSessionId(): string {
  return `ui-${Math.random().toString(36).slice(2, 10)}`;
}

export class NavigationSession {
  readonly sessionId: string;
  readonly cache: ClientCache;
  readonly reportPeriod: number;

  view = -1;
  status: "idle" | "ready" | "fetching" | "error" = "idle";
  lastError: string | null = null;
  lastFrame: Frame | null = null;
  movesSinceReport = 0;

  private readonly hooks: SessionHooks;
  private queue: Promise<unknown> = Promise.resolve();
  /** Announced by a report but not stored yet; survives fetch failures
      because the server never re-lists ids it already marked pending. */
  private readonly pendingIds = new Set<number>();

  constructor(
    private readonly api: ApiClient,
    readonly domain: DomainInfo,
    options: SessionOptions = {},
  ) {
    this.sessionId = options.sessionId ?? randomSessionId();
    this.reportPeriod = Math.max(1, options.reportPeriod ?? domain.n_t);
    this.hooks = options.hooks ?? {};
    this.cache = new ClientCache(domain);
  }

  static async connect(api: ApiClient, options: SessionOptions = {}): Promise<NavigationSession> {
    return new NavigationSession(api, await api.domain(), options);
  }

  /** Serialize an operation behind every previously queued one. */
  private enqueue<T>(op: () => Promise<T>): Promise<T> {
    const next = this.queue.then(op);
    this.queue = next.catch(() => undefined);
    return next;
  }

  /** Join the domain at a view: report, fetch the initial ball, render. */
  start(view: number): Promise<Frame> {
    return this.enqueue(async () => {
      await this.reportAndFetch(view);
      this.movesSinceReport = 0;
      this.view = view;
      return this.render(view);
    });
  }

  navigate(direction: Direction): Promise<MoveResult> {
    return this.enqueue(() => this.step(direction));
  }

  private targetOf(direction: Direction): number | null {
    const { rows, cols } = this.domain;
    const row = Math.floor(this.view / cols);
    const col = this.view % cols;
    let r = row;
    let c = col;
    if (direction === "left") c -= 1;
    else if (direction === "right") c += 1;
    else if (direction === "up") r -= 1;
    else r += 1;
    if (r < 0 || r >= rows || c < 0 || c >= cols) return null;
    return r * cols + c;
  }

  private async step(direction: Direction): Promise<MoveResult> {
    if (this.status === "error") {
      return { moved: false, view: this.view, blocked: "error", fetched: [] };
    }
    if (this.view < 0) throw new ProtocolError("navigate before start()");
    const target = this.targetOf(direction);
    if (target === null) {
      return { moved: false, view: this.view, blocked: "edge", fetched: [] };
    }
    let fetched: number[] = [];
    try {
      this.movesSinceReport += 1;
      if (this.movesSinceReport >= this.reportPeriod) {
        fetched = await this.reportAndFetch(target);
        this.movesSinceReport = 0;
      }
      if (!this.cache.hasView(target)) {
        // Off-cadence safety net (short report periods, resumed sessions):
        // never render on hope, ask the server now.
        fetched = fetched.concat(await this.reportAndFetch(target));
        this.movesSinceReport = 0;
      }
    } catch {
      // Locked at the last safe view; status and lastError already describe
      // the failure, and retry() is the way back.
      this.movesSinceReport = 0;
      return { moved: false, view: this.view, blocked: "error", fetched };
    }
    this.view = target;
    this.render(target);
    return { moved: true, view: target, fetched };
  }

  /** POST the position, then fetch every listed segment before returning. */
  private async reportAndFetch(view: number): Promise<number[]> {
    this.status = "fetching";
    this.hooks.onStateChange?.();
    try {
      const ids = await this.api.reportPosition(this.sessionId, view);
      this.cache.reports += 1;
      this.hooks.onReport?.(view, ids);
      for (const id of ids) this.pendingIds.add(id);
      const toFetch = [...this.pendingIds].sort((a, b) => a - b);
      for (const id of toFetch) {
        const { payload, bytes } = await this.api.fetchSegment(this.sessionId, id);
        this.cache.add(decodeSegment(payload), bytes);
        this.pendingIds.delete(id);
        this.hooks.onFetch?.(id, bytes);
      }
      this.status = "ready";
      return toFetch;
    } catch (err) {
      this.status = "error";
      this.lastError = err instanceof Error ? err.message : String(err);
      throw err;
    } finally {
      this.hooks.onStateChange?.();
    }
  }

  /** Render a view from its cached segment; throws if it is not delivered. */
  render(view: number): Frame {
    const segment = this.cache.segmentForView(view);
    const frame = renderView(segment, this.domain.poses[view], this.domain.intrinsics);
    this.lastFrame = frame;
    this.hooks.onRender?.(view, segment.id);
    this.hooks.onStateChange?.();
    return frame;
  }

  /** Clear a sticky fetch error and re-sync at the current view. */
  retry(): Promise<Frame> {
    return this.enqueue(async () => {
      this.status = "idle";
      this.lastError = null;
      await this.reportAndFetch(this.view);
      this.movesSinceReport = 0;
      return this.render(this.view);
    });
  }
}
