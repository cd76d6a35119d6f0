"""Timing comparison of the compiled and pure NumPy kernel backends.

Runs the three hot kernels on a preset-scale workload with both
implementations, checks that the outputs are bit-identical, and prints a
small table with per-call times and the speedup of the compiled extension.

Usage:
    python3 benchmarks/bench_kernels.py [--scene desk] [--repeats 5]
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from navseg.kernels import _py
from navseg.navdomain import NavigationDomain
from navseg.presets import get_preset
from navseg.scene import build_scene

try:
    from navseg.kernels import _ext
except ImportError:
    _ext = None


def best_time(fn, repeats: int) -> float:
    """Best-of-N wall time in seconds; the minimum is the least noisy."""
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def projection_workload(scene, domain):
    intr = domain.intrinsics
    poses = [domain.pose(k) for k in range(domain.size)]
    args = [
        (
            scene.positions,
            pose.rotation(),
            pose.translation(),
            intr.focal,
            intr.cx,
            intr.cy,
            intr.width,
            intr.height,
        )
        for pose in poses
    ]

    def run(impl):
        out = []
        for a in args:
            out.append(impl.project_points(*a))
        return out

    return run


def zbuffer_workload(scene, domain):
    intr = domain.intrinsics
    n_pixels = intr.width * intr.height
    frames = []
    for k in range(domain.size):
        pose = domain.pose(k)
        frames.append(
            _py.project_points(
                scene.positions,
                pose.rotation(),
                pose.translation(),
                intr.focal,
                intr.cx,
                intr.cy,
                intr.width,
                intr.height,
            )
        )

    def run(impl):
        out = []
        for pix, depth in frames:
            out.append(impl.zbuffer_select(pix, depth, n_pixels))
        return out

    return run


def walk_workload(domain, steps: int):
    rng = np.random.default_rng(7)
    moves = rng.integers(-1, 2, size=(steps, 2))
    drow = moves[:, 0].astype(np.int64)
    dcol = moves[:, 1].astype(np.int64)
    rows, cols = 1, domain.size

    def run(impl):
        return impl.clamped_walk(drow, dcol, 0, cols // 2, rows, cols)

    return run


def flatten(result) -> bytes:
    """Concatenated raw bytes of every array in a (possibly nested) result."""
    if isinstance(result, np.ndarray):
        return result.tobytes()
    return b"".join(flatten(part) for part in result)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scene", default="desk", help="preset name for the workload")
    parser.add_argument("--repeats", type=int, default=5, help="best-of-N timing repeats")
    parser.add_argument("--walk-steps", type=int, default=200_000)
    args = parser.parse_args(argv)

    if _ext is None:
        print("compiled extension is not importable; nothing to compare", file=sys.stderr)
        return 1

    cfg = get_preset(args.scene)
    scene = build_scene(cfg)
    domain = NavigationDomain.from_spec(cfg.domain, cfg.intrinsics)
    intr = domain.intrinsics
    print(
        f"workload: scene '{args.scene}' "
        f"({scene.positions.shape[0]} voxels, {domain.size} views, "
        f"{intr.width}x{intr.height}), best of {args.repeats}"
    )

    cases = [
        (f"project_points x{domain.size}", projection_workload(scene, domain)),
        (f"zbuffer_select x{domain.size}", zbuffer_workload(scene, domain)),
        (f"clamped_walk ({args.walk_steps} steps)", walk_workload(domain, args.walk_steps)),
    ]

    name_w = max(len(name) for name, _ in cases)
    header = f"{'kernel':<{name_w}}  {'ext':>10}  {'python':>10}  {'speedup':>8}  identical"
    print()
    print(header)
    print("-" * len(header))
    ok = True
    for name, run in cases:
        ext_out = run(_ext)
        py_out = run(_py)
        identical = flatten(ext_out) == flatten(py_out)
        ok &= identical
        t_ext = best_time(lambda: run(_ext), args.repeats)
        t_py = best_time(lambda: run(_py), args.repeats)
        print(
            f"{name:<{name_w}}  {t_ext * 1e3:>8.2f}ms  {t_py * 1e3:>8.2f}ms"
            f"  {t_py / t_ext:>7.2f}x  {'yes' if identical else 'NO'}"
        )

    if not ok:
        print("\nbackends disagree; the fallback is out of sync", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
