/**
 * Browser wiring: canvas output, keyboard navigation, HUD, settings panel.
 *
 * Keys: arrows or WASD move one view per press (up/down only do something
 * on grid domains). The settings panel changes the server URL and the
 * report period, then reconnects as a fresh session.
 */

import { ApiClient } from "./api";
import { hudState } from "./hud";
import type { HudState } from "./hud";
import { NavigationSession } from "./session";
import type { Direction } from "./session";
import "./style.css";

const SCALE = 10;

const KEY_DIRECTIONS: Record<string, Direction> = {
  ArrowLeft: "left",
  ArrowRight: "right",
  ArrowUp: "up",
  ArrowDown: "down",
  a: "left",
  d: "right",
  w: "up",
  s: "down",
};

interface Settings {
  serverUrl: string;
  reportPeriod: number | null;
}

function loadSettings(): Settings {
  try {
    const raw = localStorage.getItem("navseg-client-settings");
    if (raw) return JSON.parse(raw) as Settings;
  } catch {
    // fall through to defaults
  }
  return { serverUrl: "", reportPeriod: null };
}

function saveSettings(s: Settings): void {
  localStorage.setItem("navseg-client-settings", JSON.stringify(s));
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className?: string, text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

class App {
  private session: NavigationSession | null = null;
  private canvas = el("canvas", "viewport");
  private hudStats = el("div", "hud-stats");
  private strip = el("div", "strip");
  private banner = el("div", "banner hidden");
  private form: { url: HTMLInputElement; period: HTMLInputElement };
  private settings = loadSettings();

  constructor(private root: HTMLElement) {
    const stage = el("div", "stage");
    stage.append(this.canvas, this.banner);
    const panel = el("form", "settings");
    const urlLabel = el("label", undefined, "server URL ");
    const url = el("input");
    url.type = "text";
    url.placeholder = "same origin";
    url.value = this.settings.serverUrl;
    urlLabel.append(url);
    const periodLabel = el("label", undefined, "report period ");
    const period = el("input");
    period.type = "number";
    period.min = "1";
    period.placeholder = "server N_T";
    if (this.settings.reportPeriod) period.value = String(this.settings.reportPeriod);
    periodLabel.append(period);
    const apply = el("button", undefined, "apply + reconnect");
    apply.type = "submit";
    panel.append(urlLabel, periodLabel, apply);
    panel.addEventListener("submit", (ev) => {
      ev.preventDefault();
      this.settings = {
        serverUrl: url.value.trim(),
        reportPeriod: period.value ? Math.max(1, Number(period.value)) : null,
      };
      saveSettings(this.settings);
      void this.connect();
    });
    this.form = { url, period };
    const help = el(
      "div", "help",
      "arrows / WASD to move; segments stream in as you approach them",
    );
    this.root.append(stage, this.hudStats, this.strip, help, panel);
    window.addEventListener("keydown", (ev) => this.onKey(ev));
  }

  async connect(): Promise<void> {
    this.session = null;
    this.showBanner("connecting…");
    try {
      const api = new ApiClient(this.settings.serverUrl || "");
      const session = await NavigationSession.connect(api, {
        reportPeriod: this.settings.reportPeriod ?? undefined,
        hooks: { onStateChange: () => this.refresh() },
      });
      const { width, height } = session.domain.intrinsics;
      this.canvas.width = width;
      this.canvas.height = height;
      this.canvas.style.width = `${width * SCALE}px`;
      this.canvas.style.height = `${height * SCALE}px`;
      this.form.period.placeholder = `server N_T = ${session.domain.n_t}`;
      const start = Math.floor(session.domain.rows / 2) * session.domain.cols
        + Math.floor(session.domain.cols / 2);
      this.session = session;
      await session.start(start);
      this.hideBanner();
    } catch (err) {
      this.showBanner(`connection failed: ${err instanceof Error ? err.message : err}`);
    }
    this.refresh();
  }

  private onKey(ev: KeyboardEvent): void {
    if (!this.session) return;
    if ((ev.key === "r" || ev.key === "R") && this.session.status === "error") {
      ev.preventDefault();
      void this.session.retry().then(() => this.refresh()).catch(() => this.refresh());
      return;
    }
    const direction = KEY_DIRECTIONS[ev.key];
    if (!direction) return;
    ev.preventDefault();
    void this.session.navigate(direction).then(() => this.refresh());
  }

  private refresh(): void {
    const session = this.session;
    if (!session) return;
    if (session.lastFrame) this.blit();
    const hud = hudState(session);
    this.renderStats(hud);
    this.renderStrip(hud);
    if (session.status === "error") {
      this.showBanner(`stalled: ${session.lastError ?? "fetch failed"} (press R to retry)`);
    } else {
      this.hideBanner();
    }
  }

  private blit(): void {
    const frame = this.session!.lastFrame!;
    const ctx = this.canvas.getContext("2d")!;
    const img = ctx.createImageData(frame.width, frame.height);
    for (let i = 0; i < frame.width * frame.height; i++) {
      img.data[4 * i] = frame.rgb[3 * i];
      img.data[4 * i + 1] = frame.rgb[3 * i + 1];
      img.data[4 * i + 2] = frame.rgb[3 * i + 2];
      img.data[4 * i + 3] = 255;
    }
    ctx.putImageData(img, 0, 0);
  }

  private renderStats(hud: HudState): void {
    this.hudStats.textContent =
      `view ${hud.view}  ·  segment ${hud.segmentId}  ·  ` +
      `${hud.bytes.toLocaleString()} bytes  ·  ${hud.requests} requests  ·  ` +
      `${hud.segmentsDelivered} segments cached  ·  ` +
      `${(hud.interpolatedFraction * 100).toFixed(2)}% filled  ·  ${hud.status}`;
  }

  private renderStrip(hud: HudState): void {
    this.strip.replaceChildren();
    this.strip.style.gridTemplateColumns = `repeat(${hud.cols}, 1fr)`;
    for (const cell of hud.strip) {
      const node = el("span", "cell");
      node.classList.toggle("delivered", cell.delivered);
      node.classList.toggle("boundary", cell.startsSegment);
      node.classList.toggle("reference", cell.isReference);
      node.classList.toggle("ball", cell.inBall);
      node.classList.toggle("current", cell.isCurrent);
      node.dataset.segment = String(cell.segmentId % 6);
      node.title = `view ${cell.view} · segment ${cell.segmentId}` +
        (cell.isReference ? " · reference" : "");
      this.strip.append(node);
    }
  }

  private showBanner(text: string): void {
    this.banner.textContent = text;
    this.banner.classList.remove("hidden");
  }

  private hideBanner(): void {
    this.banner.classList.add("hidden");
  }
}

const app = new App(document.getElementById("app")!);
void app.connect();
