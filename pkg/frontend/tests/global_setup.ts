/**
 * Regenerates the conformance fixtures before the suite: the partition the
 * server will load, and the offline replay of the scripted session that the
 * client must match. Both are deterministic, so rebuilding keeps them in
 * sync with the backend at no cost.
 */

import { execFileSync } from "node:child_process";
import { mkdirSync } from "node:fs";
import { fileURLToPath } from "node:url";
import path from "node:path";

const here = path.dirname(fileURLToPath(import.meta.url));
export const repoRoot = path.resolve(here, "../..");
export const fixtureDir = path.resolve(here, "../.fixtures");
export const partitionPath = path.join(fixtureDir, "partition.json");
export const oraclePath = path.join(fixtureDir, "oracle.json");

export const SCENE = "desk";
export const START_VIEW = 5;

export default function setup(): void {
  mkdirSync(fixtureDir, { recursive: true });
  const run = (args: string[]) =>
    execFileSync("python3", args, { cwd: repoRoot, stdio: "pipe", timeout: 180_000 });
  run([
    "-m", "navseg.cli", "partition",
    "--scene", SCENE, "--nv", "6", "--nt", "5", "--q", "16",
    "--out", partitionPath,
  ]);
  run([
    path.join(here, "../scripts/gen_oracle.py"),
    "--scene", SCENE,
    "--partition", partitionPath,
    "--start", String(START_VIEW),
    "--out", oraclePath,
  ]);
}
