"""Offline prediction of a scripted client session, for conformance tests.

Replays the client protocol rules against a partition file using only the
navigation-ball and membership primitives: an initial position report, then
one report per `n_t` successful moves, each listing the not-yet-delivered
segments whose membership intersects the ball at the reported view. The
browser client walking the same input script must report, fetch, and render
exactly this schedule.
"""

import argparse
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[2] / "src"))

from navseg.navdomain import NavigationDomain, navigation_ball
from navseg.partition import partition_from_json
from navseg.presets import PRESETS, get_preset
from navseg.render import ViewCache
from navseg.scene import SceneConfig, build_scene


def scripted_inputs() -> list:
    """200 keystrokes: a few rejected vertical moves, a sweep to the right
    edge (overshooting so edge clamping is exercised), then back left."""
    return ["up", "up", "down"] + ["right"] * 117 + ["left"] * 80


def build_cache(spec: str) -> ViewCache:
    config = get_preset(spec) if spec in PRESETS else SceneConfig.load(spec)
    scene = build_scene(config)
    domain = NavigationDomain.from_spec(config.domain, config.intrinsics)
    return ViewCache(scene, domain)


def replay(cache: ViewCache, seg_of, n_t: int, start: int, inputs: list) -> dict:
    domain = cache.domain
    rows, cols = domain.rows, domain.cols

    def ball_segments(view: int) -> set:
        return {int(seg_of[v]) for v in navigation_ball(domain, view, n_t)}

    delivered = set()
    reports = []

    def report(view: int, after_input: int) -> None:
        fetch = sorted(ball_segments(view) - delivered)
        delivered.update(fetch)
        reports.append({"after_input": after_input, "view": view, "fetch": fetch})

    view = start
    report(view, -1)
    renders = [view]
    moves = 0
    for i, direction in enumerate(inputs):
        row, col = divmod(view, cols)
        if direction == "left":
            col -= 1
        elif direction == "right":
            col += 1
        elif direction == "up":
            row -= 1
        else:
            row += 1
        if not (0 <= row < rows and 0 <= col < cols):
            continue
        target = row * cols + col
        moves += 1
        if moves >= n_t:
            report(target, i)
            moves = 0
        if int(seg_of[target]) not in delivered:
            raise AssertionError(
                f"input {i}: view {target} rendered before its segment arrived"
            )
        view = target
        renders.append(view)

    return {
        "start": start,
        "n_t": n_t,
        "inputs": inputs,
        "reports": reports,
        "renders": renders,
        "final_view": view,
        "segments_delivered": sorted(delivered),
    }


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scene", default="desk")
    parser.add_argument("--partition", required=True)
    parser.add_argument("--start", type=int, default=5)
    parser.add_argument("--out", required=True)
    args = parser.parse_args()

    with open(args.partition) as f:
        doc = json.load(f)
    cache = build_cache(args.scene)
    part = partition_from_json(doc, cache)
    oracle = replay(
        cache, part.segment_of(), int(doc["n_t"]), args.start, scripted_inputs()
    )
    oracle["scene"] = args.scene
    with open(args.out, "w") as f:
        json.dump(oracle, f)
        f.write("\n")
    print(
        f"{len(oracle['inputs'])} inputs, {len(oracle['renders'])} renders, "
        f"{len(oracle['reports'])} reports -> {args.out}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
