/** Spawning and tearing down the real segment server for integration tests. */

import { spawn } from "node:child_process";
import type { ChildProcess } from "node:child_process";
import { readFileSync } from "node:fs";
import { oraclePath, partitionPath, repoRoot, SCENE } from "./global_setup";

export interface LiveServer {
  baseUrl: string;
  stop: () => void;
}

export interface Oracle {
  scene: string;
  start: number;
  n_t: number;
  inputs: ("left" | "right" | "up" | "down")[];
  reports: { after_input: number; view: number; fetch: number[] }[];
  renders: number[];
  final_view: number;
  segments_delivered: number[];
}

export function loadOracle(): Oracle {
  return JSON.parse(readFileSync(oraclePath, "utf8")) as Oracle;
}

/**
 * Start `navseg serve` on a free port and wait until it announces its URL.
 * The child is killed on stop() and, as a backstop, when the test process
 * exits.
 */
export function startServer(): Promise<LiveServer> {
  const child: ChildProcess = spawn(
    "python3",
    ["-m", "navseg.cli", "serve", "--scene", SCENE, "--partition", partitionPath, "--port", "0"],
    {
      cwd: repoRoot,
      stdio: ["ignore", "pipe", "pipe"],
      // the announcement line must arrive promptly through the pipe
      env: { ...process.env, PYTHONUNBUFFERED: "1" },
    },
  );
  const kill = () => {
    if (child.exitCode === null) child.kill("SIGTERM");
  };
  process.once("exit", kill);

  return new Promise((resolve, reject) => {
    let out = "";
    let err = "";
    const timer = setTimeout(() => {
      kill();
      reject(new Error(`server did not come up; stderr so far:\n${err}`));
    }, 120_000);
    child.stdout!.on("data", (chunk: Buffer) => {
      out += chunk.toString();
      const m = out.match(/on (http:\/\/[\d.]+:\d+)\//);
      if (m) {
        clearTimeout(timer);
        resolve({ baseUrl: m[1], stop: kill });
      }
    });
    child.stderr!.on("data", (chunk: Buffer) => {
      err += chunk.toString();
    });
    child.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`server exited early with code ${code}:\n${err}`));
    });
  });
}
