"""Command line entry point.

Subcommands cover the whole pipeline: scene construction, similarity and
reference-position measurements, partition optimization, segment-count
selection, streaming simulations, the multi-user load comparison, and the
live server. Curves and tables are CSV, structured artifacts are JSON,
and every file embeds the exact configuration (seed included) that
produced it.

Exit statuses: 0 success, 2 bad command line (argparse), 3 unreadable or
unparsable input file, 4 parameter out of range.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from .innovation import similarity
from .navdomain import NavigationDomain
from .partition import (
    CostParams,
    SegmentCoster,
    lloyd_optimize,
    partition_from_json,
    partition_to_json,
    refine_reference,
    reference_sweep,
    select_num_segments,
)
from .presets import PRESETS, get_preset
from .render import ViewCache
from .scene import SceneConfig, build_scene
from .server import SegmentService, run_server
from .sim import (
    FRAME_RATE,
    MultiUserConfig,
    WalkPolicy,
    joint_crossover,
    random_walk,
    simulate_multiuser,
    simulate_session,
)
from .codec import encode_reference

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_UNREADABLE = 3
EXIT_RANGE = 4


# ---- artifact helpers ----


def write_csv(path, config: dict, header, rows) -> None:
    """CSV with the producing configuration embedded as a comment line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(f"# config={json.dumps(config, sort_keys=True)}\n")
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


def read_csv_artifact(path):
    """Load a CSV artifact back: (embedded config, header, value rows)."""
    with open(path) as f:
        first = f.readline()
        if not first.startswith("# config="):
            raise ValueError("not a CSV artifact: missing config comment")
        config = json.loads(first[len("# config=") :])
        reader = csv.reader(f)
        header = next(reader)
        rows = [row for row in reader if row]
    return config, header, rows


def _outfile(args, default_name: str, config: dict):
    """Resolve the output path; without --out, make a timestamped run
    directory with a manifest."""
    if getattr(args, "out", None):
        return Path(args.out)
    stamp = time.strftime("%Y%m%d-%H%M%S")
    run_dir = Path("runs") / f"{args.command}-{stamp}"
    run_dir.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": args.command,
        "created": stamp,
        "config": config,
        "outputs": [default_name],
    }
    with open(run_dir / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return run_dir / default_name


def _load_scene_config(spec: str) -> SceneConfig:
    """A preset name or a path to a scene configuration file."""
    if spec in PRESETS:
        return get_preset(spec)
    return SceneConfig.load(spec)


def _build(spec: str):
    config = _load_scene_config(spec)
    scene = build_scene(config)
    domain = NavigationDomain.from_spec(config.domain, config.intrinsics)
    return config, scene, ViewCache(scene, domain)


def _parse_segment_spec(spec: str, size: int) -> tuple:
    """Member views from 'lo:hi' (inclusive) or 'a,b,c'."""
    if ":" in spec:
        lo_s, hi_s = spec.split(":", 1)
        lo, hi = int(lo_s), int(hi_s)
        if lo > hi:
            raise ValueError(f"segment range {spec!r} is empty")
        members = tuple(range(lo, hi + 1))
    else:
        members = tuple(sorted(int(x) for x in spec.split(",")))
    if not members or members[0] < 0 or members[-1] >= size:
        raise ValueError(f"segment spec {spec!r} leaves the domain [0, {size})")
    return members


# ---- subcommands ----


def cmd_build_scene(args) -> int:
    config, scene, cache = _build(args.scene)
    meta = {"scene": args.scene}
    out = _outfile(args, f"{config.name}.json", meta)
    out.parent.mkdir(parents=True, exist_ok=True)
    config.save(out)
    print(f"{config.name}: {scene.voxel_count} voxels, {cache.domain.size} views -> {out}")
    return EXIT_OK


def cmd_similarity_curve(args) -> int:
    config, scene, cache = _build(args.scene)
    domain = cache.domain
    if not (0 <= args.ref < domain.size):
        raise IndexError(f"--ref {args.ref} outside [0, {domain.size})")
    count = min(args.count, domain.size)
    ref_ids = cache.ids(args.ref)
    meta = {"scene": args.scene, "ref": args.ref, "count": count}
    rows = []
    for k in range(count):
        gamma = similarity(ref_ids, cache.ids(k))
        rows.append([k, gamma, gamma / ref_ids.size])
    out = _outfile(args, "similarity.csv", meta)
    write_csv(out, meta, ["view", "gamma", "similarity"], rows)
    print(f"similarity of {count} views against view {args.ref} -> {out}")
    return EXIT_OK


def cmd_sweep_reference(args) -> int:
    config, scene, cache = _build(args.scene)
    members = _parse_segment_spec(args.segment, cache.domain.size)
    coster = SegmentCoster(cache, args.q)
    rows = reference_sweep(coster, members)
    meta = {"scene": args.scene, "segment": args.segment, "q": args.q}
    out = _outfile(args, "sweep.csv", meta)
    write_csv(
        out,
        meta,
        ["reference", "phi_size", "ref_bits", "aux_bits", "total_bits"],
        [[r["reference"], r["phi_size"], r["ref_bits"], r["aux_bits"], r["total_bits"]] for r in rows],
    )
    best = min(rows, key=lambda r: (r["total_bits"], r["reference"]))
    print(f"swept {len(rows)} references; best {best['reference']} ({best['total_bits']} bits) -> {out}")
    return EXIT_OK


def cmd_partition(args) -> int:
    config, scene, cache = _build(args.scene)
    params = CostParams(lam=args.lam, mu=0.0, q=args.q, n_t=args.nt)
    part, trace = lloyd_optimize(cache, args.nv, params)
    doc = partition_to_json(part, params, trace)
    meta = {"scene": args.scene, "nv": args.nv, "lambda": args.lam, "q": args.q, "nt": args.nt}
    doc["config"] = meta
    out = _outfile(args, "partition.json", meta)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")
    refs = [s.reference for s in part.segments]
    print(
        f"{args.nv} segments, references {refs}, objective {part.objective:.1f} "
        f"(storage {part.storage_bits} bits) -> {out}"
    )
    return EXIT_OK


def cmd_select_nv(args) -> int:
    config, scene, cache = _build(args.scene)
    params = CostParams(lam=args.lam, mu=args.mu, q=args.q, n_t=args.nt)
    est = select_num_segments(cache, params)
    meta = {"scene": args.scene, "mu": args.mu, "nt": args.nt, "q": args.q}
    rows = [
        [r.n_v, f"{r.mean_ref_bits:.1f}", f"{r.mean_aux_bits:.1f}", f"{r.objective:.1f}",
         int(r.n_v == est.n_v_star)]
        for r in est.records
    ]
    out = _outfile(args, "select-nv.csv", meta)
    write_csv(out, meta, ["n_v", "mean_ref_bits", "mean_aux_bits", "objective", "selected"], rows)
    print(f"N_V* = {est.n_v_star} for mu={args.mu}, n_t={args.nt} -> {out}")
    return EXIT_OK


def _parse_nt_list(raw: str) -> list:
    values = [int(x) for x in raw.split(",") if x]
    if not values or any(v < 1 for v in values):
        raise ValueError(f"--nt must be positive integers, got {raw!r}")
    return values


def cmd_simulate(args) -> int:
    config, scene, cache = _build(args.scene)
    with open(args.partition) as f:
        doc = json.load(f)
    part = partition_from_json(doc, cache)
    nt_list = _parse_nt_list(args.nt)
    domain = cache.domain
    ticks = args.horizon * FRAME_RATE
    rng = np.random.default_rng(args.seed)
    starts = rng.choice(domain.size, size=args.walks, p=domain.popularity)
    walk_seeds = rng.integers(0, 2**63 - 1, size=args.walks)
    paths = [
        random_walk(domain, int(starts[i]), ticks, WalkPolicy(), int(walk_seeds[i]))
        for i in range(args.walks)
    ]
    meta = {
        "scene": args.scene,
        "partition": str(args.partition),
        "walks": args.walks,
        "nt": args.nt,
        "seed": args.seed,
        "horizon": args.horizon,
    }
    rows = []
    for n_t in nt_list:
        traces = [simulate_session(part, p, n_t) for p in paths]
        rate = np.mean([t.rate_per_second for t in traces], axis=0)
        cum = np.mean([t.cumulative_bits for t in traces], axis=0)
        for s in range(len(rate)):
            rows.append([n_t, s, f"{rate[s]:.1f}", f"{cum[s]:.1f}"])
    out = _outfile(args, "simulate.csv", meta)
    write_csv(out, meta, ["n_t", "second", "mean_rate_bits", "mean_cumulative_bits"], rows)
    final = {r[0]: r[3] for r in rows}
    print(f"{args.walks} walks over {args.horizon}s; mean cumulative bits {final} -> {out}")
    return EXIT_OK


def cmd_multiuser(args) -> int:
    config, scene, cache = _build(args.scene)
    params = CostParams(lam=0.5, mu=0.0, q=args.q, n_t=args.nt)
    if args.sweep_t:
        if not args.partition:
            raise ValueError("--partition is required for --sweep-t")
        with open(args.partition) as f:
            part = partition_from_json(json.load(f), cache)
        t_values = [float(x) for x in args.sweep_t.split(",") if x]
        if not t_values or any(t <= 0 for t in t_values):
            raise ValueError(f"--sweep-t must be positive durations, got {args.sweep_t!r}")
        joint, _ = lloyd_optimize(cache, 1, params)
        result = joint_crossover(
            part, args.nt, t_values, args.nnu, args.duration, args.seed, joint.storage_bits
        )
        meta = {
            "scene": args.scene,
            "partition": str(args.partition),
            "nnu": args.nnu,
            "sweep_t": args.sweep_t,
            "duration": args.duration,
            "nt": args.nt,
            "q": args.q,
            "seed": args.seed,
            "crossover_t": result["crossover_t"],
        }
        rows = [
            [r["t_mean"], r["partitioned_bits"], r["joint_all_bits"]] for r in result["rows"]
        ]
        out = _outfile(args, "multiuser-crossover.csv", meta)
        write_csv(out, meta, ["t_mean", "partitioned_bits", "joint_all_bits"], rows)
        print(f"crossover T = {result['crossover_t']} -> {out}")
        return EXIT_OK
    if args.repr == "partitioned":
        if not args.partition:
            raise ValueError("--partition is required for --repr partitioned")
        with open(args.partition) as f:
            part = partition_from_json(json.load(f), cache)
        view_bits = None
        joint_bits = None
    else:
        part, _ = lloyd_optimize(cache, 1, params)
        joint_bits = part.storage_bits
        view_bits = None
        if args.repr == "all_intra":
            view_bits = np.array(
                [encode_reference(cache.view(v), args.q).bits for v in range(cache.domain.size)],
                dtype=np.int64,
            )
    mu_config = MultiUserConfig(
        n_nu=args.nnu, t_mean=args.t, duration=args.duration, representation=args.repr
    )
    report = simulate_multiuser(
        part, mu_config, args.seed, args.nt, view_bits=view_bits, joint_bits=joint_bits
    )
    meta = {
        "scene": args.scene,
        "partition": str(args.partition) if args.partition else None,
        "nnu": args.nnu,
        "t": args.t,
        "duration": args.duration,
        "repr": args.repr,
        "nt": args.nt,
        "q": args.q,
        "seed": args.seed,
    }
    rows = [[s, int(report.per_second[s])] for s in range(args.duration)]
    out = _outfile(args, "multiuser.csv", meta)
    write_csv(out, meta, ["second", "bits"], rows)
    print(
        f"{report.sessions} sessions ({args.repr}); total {report.total_bits} bits -> {out}"
    )
    return EXIT_OK


def cmd_serve(args) -> int:
    config, scene, cache = _build(args.scene)
    with open(args.partition) as f:
        doc = json.load(f)
    part = partition_from_json(doc, cache)
    n_t = args.nt if args.nt is not None else int(doc.get("n_t", 5))
    service = SegmentService(cache, part, n_t, float(doc.get("q", 16.0)))
    run_server(service, port=args.port, host=args.host, static_dir=args.static)
    return EXIT_OK


# ---- parser ----


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="navseg",
        description="Navigation-segment representation tools for multiview scenes",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add_scene(sp):
        sp.add_argument(
            "--scene",
            default="desk",
            help=f"preset name ({', '.join(sorted(PRESETS))}) or scene JSON path",
        )

    sp = sub.add_parser("build-scene", help="sample a scene and write its configuration")
    add_scene(sp)
    sp.add_argument("--out", help="output JSON path")
    sp.set_defaults(func=cmd_build_scene)

    sp = sub.add_parser("similarity-curve", help="pairwise visibility overlap against one view")
    add_scene(sp)
    sp.add_argument("--ref", type=int, required=True, help="anchor view index")
    sp.add_argument("--count", type=int, default=100, help="number of views to compare")
    sp.add_argument("--out", help="output CSV path")
    sp.set_defaults(func=cmd_similarity_curve)

    sp = sub.add_parser("sweep-reference", help="coded size of every candidate reference")
    add_scene(sp)
    sp.add_argument("--segment", required=True, help="member views, 'lo:hi' or 'a,b,c'")
    sp.add_argument("--q", type=float, default=16.0, help="quantization step")
    sp.add_argument("--out", help="output CSV path")
    sp.set_defaults(func=cmd_sweep_reference)

    sp = sub.add_parser("partition", help="optimize a partition into navigation segments")
    add_scene(sp)
    sp.add_argument("--nv", type=int, required=True, help="number of segments")
    sp.add_argument("--lambda", dest="lam", type=float, default=0.5, help="storage weight")
    sp.add_argument("--q", type=float, default=16.0, help="quantization step")
    sp.add_argument("--nt", type=int, default=5, help="position report period")
    sp.add_argument("--out", help="output JSON path")
    sp.set_defaults(func=cmd_partition)

    sp = sub.add_parser("select-nv", help="choose the segment count for a report period")
    add_scene(sp)
    sp.add_argument("--mu", type=float, required=True, help="segment-count penalty")
    sp.add_argument("--nt", type=int, default=5, help="position report period")
    sp.add_argument("--q", type=float, default=16.0, help="quantization step")
    sp.add_argument("--lambda", dest="lam", type=float, default=0.5, help="storage weight")
    sp.add_argument("--out", help="output CSV path")
    sp.set_defaults(func=cmd_select_nv)

    sp = sub.add_parser("simulate", help="random-walk streaming sessions against a partition")
    add_scene(sp)
    sp.add_argument("--partition", required=True, help="partition JSON path")
    sp.add_argument("--walks", type=int, default=20, help="number of walks to average")
    sp.add_argument("--nt", default="5", help="report period(s), comma separated")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--horizon", type=int, default=100, help="seconds per walk")
    sp.add_argument("--out", help="output CSV path")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("multiuser", help="aggregate server load for a representation")
    add_scene(sp)
    sp.add_argument("--partition", help="partition JSON path (for --repr partitioned)")
    sp.add_argument("--nnu", type=int, default=5, help="users arriving per second")
    sp.add_argument("--t", type=float, default=10.0, help="mean session duration, seconds")
    sp.add_argument("--duration", type=int, default=1000, help="horizon, seconds")
    sp.add_argument(
        "--repr",
        default="partitioned",
        choices=["partitioned", "all_intra", "joint_all"],
        help="representation to serve",
    )
    sp.add_argument("--nt", type=int, default=5, help="position report period")
    sp.add_argument("--q", type=float, default=16.0, help="quantization step")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument(
        "--sweep-t",
        dest="sweep_t",
        default=None,
        help="comma-separated mean durations; reports partitioned vs joint totals "
        "per value and the crossover duration",
    )
    sp.add_argument("--out", help="output CSV path")
    sp.set_defaults(func=cmd_multiuser)

    sp = sub.add_parser("serve", help="serve segments over HTTP")
    add_scene(sp)
    sp.add_argument("--partition", required=True, help="partition JSON path")
    sp.add_argument("--port", type=int, default=8080)
    sp.add_argument("--nt", type=int, default=None, help="report period (default: from file)")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--static", default=None, help="directory of client files to serve at /")
    sp.set_defaults(func=cmd_serve)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, IsADirectoryError, PermissionError, json.JSONDecodeError) as e:
        print(f"error: cannot read input: {e}", file=sys.stderr)
        return EXIT_UNREADABLE
    except (ValueError, IndexError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RANGE


if __name__ == "__main__":
    sys.exit(main())
