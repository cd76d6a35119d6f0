"""Streaming experiments: random-walk navigation, per-session delivery
traces, ensemble averaging, and multi-user server-load comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import clamped_walk
from .navdomain import NavigationDomain, navigation_ball
from .partition import Partition

FRAME_RATE = 30
REPRESENTATIONS = ("partitioned", "all_intra", "joint_all")


@dataclass(frozen=True)
class WalkPolicy:
    """Per-tick move distribution; out-of-grid moves keep the position."""

    p_stay: float = 0.4
    p_left: float = 0.3
    p_right: float = 0.3
    p_up: float = 0.0
    p_down: float = 0.0

    def __post_init__(self):
        probs = (self.p_stay, self.p_left, self.p_right, self.p_up, self.p_down)
        if any(p < 0 for p in probs):
            raise ValueError("probabilities must be non-negative")
        if not math.isclose(sum(probs), 1.0, abs_tol=1e-9):
            raise ValueError("move probabilities must sum to 1")

    def thresholds(self) -> np.ndarray:
        c = np.cumsum([self.p_stay, self.p_left, self.p_right, self.p_up, self.p_down])
        c[-1] = 1.0
        return c


# (drow, dcol) per move code: stay, left, right, up, down
_MOVES = np.array([[0, 0], [0, -1], [0, 1], [-1, 0], [1, 0]], dtype=np.int64)


def random_walk(
    domain: NavigationDomain,
    start: int,
    ticks: int,
    policy: WalkPolicy = WalkPolicy(),
    seed: int = 0,
) -> np.ndarray:
    """Seeded random walk over the pose grid; one entry per tick.

    path[0] is the start view; each later entry follows one sampled move
    with sticky boundaries. Identical seeds give identical paths.
    """
    if not (0 <= start < domain.size):
        raise IndexError("start view out of range")
    if ticks < 1:
        raise ValueError("need at least one tick")
    rng = np.random.default_rng(seed)
    u = rng.random(ticks - 1)
    codes = np.minimum(np.searchsorted(policy.thresholds(), u, side="right"), 4)
    deltas = _MOVES[codes]
    r0, c0 = domain.rc(start)
    walked = clamped_walk(deltas[:, 0], deltas[:, 1], r0, c0, domain.rows, domain.cols)
    return np.concatenate([np.array([start], dtype=np.int64), walked])


@dataclass(frozen=True)
class Delivery:
    tick: int
    segment: int
    bits: int


@dataclass
class SessionTrace:
    path: np.ndarray
    n_t: int
    frame_rate: int
    deliveries: tuple
    rate_per_second: np.ndarray  # bits delivered during each second
    cumulative_bits: np.ndarray  # running total at each second boundary

    @property
    def total_bits(self) -> int:
        return int(self.rate_per_second.sum())


class StallError(RuntimeError):
    """A view was reached before its segment had been delivered."""


def _ball_segment_table(partition: Partition, n_t: int) -> list:
    """For every view: which segments intersect its navigation ball."""
    seg_of = partition.segment_of()
    return [
        np.unique(seg_of[navigation_ball(partition.domain, v, n_t)])
        for v in range(partition.domain.size)
    ]


def simulate_session(
    partition: Partition,
    path: np.ndarray,
    n_t: int,
    frame_rate: int = FRAME_RATE,
    ball_table: list | None = None,
) -> SessionTrace:
    """Replay one navigation session against a partition.

    The position is reported at tick 0 and every n_t ticks; each report
    delivers the not-yet-delivered segments whose membership intersects
    the navigation ball at the reported view, before that tick renders.
    Every tick is checked against the prefetch guarantee.
    """
    if n_t < 1:
        raise ValueError("n_t must be at least 1")
    path = np.asarray(path, dtype=np.int64)
    if path.size == 0:
        raise ValueError("empty path")
    if path.min() < 0 or path.max() >= partition.domain.size:
        raise ValueError("path leaves the navigation domain")
    if ball_table is None:
        ball_table = _ball_segment_table(partition, n_t)
    bits = np.array([s.size_bits for s in partition.segments], dtype=np.int64)
    n_seg = len(partition.segments)
    delivered = np.zeros(n_seg, dtype=bool)
    delivery_tick = np.full(n_seg, np.iinfo(np.int64).max, dtype=np.int64)
    deliveries = []
    for t in range(0, path.size, n_t):
        segs = ball_table[path[t]]
        new = segs[~delivered[segs]]
        delivered[new] = True
        delivery_tick[new] = t
        deliveries.extend(Delivery(t, int(s), int(bits[s])) for s in new)
    seg_of = partition.segment_of()
    need = delivery_tick[seg_of[path]]
    if (need > np.arange(path.size)).any():
        first = int(np.argmax(need > np.arange(path.size)))
        raise StallError(f"view {int(path[first])} reached at tick {first} before delivery")
    seconds = max(1, math.ceil(path.size / frame_rate))
    rate = np.zeros(seconds, dtype=np.int64)
    for d in deliveries:
        rate[d.tick // frame_rate] += d.bits
    return SessionTrace(
        path=path,
        n_t=n_t,
        frame_rate=frame_rate,
        deliveries=tuple(deliveries),
        rate_per_second=rate,
        cumulative_bits=np.cumsum(rate),
    )


def average_cumulative(
    partition: Partition,
    n_paths: int,
    horizon_s: int,
    n_t_list,
    seed: int,
    policy: WalkPolicy = WalkPolicy(),
    frame_rate: int = FRAME_RATE,
) -> list:
    """Mean cumulative delivered bits at the horizon, per report period.

    Paths depend only on (seed, n_paths, horizon, policy), so two
    partitions averaged with the same seed see identical navigation.
    """
    if n_paths < 1:
        raise ValueError("need at least one path")
    rng = np.random.default_rng(seed)
    ticks = horizon_s * frame_rate
    starts = rng.choice(partition.domain.size, size=n_paths, p=partition.domain.popularity)
    walk_seeds = rng.integers(0, 2**63 - 1, size=n_paths)
    paths = [
        random_walk(partition.domain, int(starts[i]), ticks, policy, int(walk_seeds[i]))
        for i in range(n_paths)
    ]
    rows = []
    for n_t in n_t_list:
        table = _ball_segment_table(partition, n_t)
        totals = [
            simulate_session(partition, p, n_t, frame_rate, table).total_bits for p in paths
        ]
        rows.append(
            {
                "n_t": int(n_t),
                "mean_cumulative_bits": float(np.mean(totals)),
                "n_paths": n_paths,
                "horizon_s": horizon_s,
            }
        )
    return rows


@dataclass(frozen=True)
class MultiUserConfig:
    n_nu: int  # users arriving each second
    t_mean: float  # expected session duration, seconds
    duration: int  # simulated horizon, seconds
    representation: str

    def __post_init__(self):
        if self.n_nu < 0:
            raise ValueError("n_nu must be non-negative")
        if self.t_mean <= 0:
            raise ValueError("t_mean must be positive")
        if self.duration < 1:
            raise ValueError("duration must be at least one second")
        if self.representation not in REPRESENTATIONS:
            raise ValueError(f"representation must be one of {REPRESENTATIONS}")


@dataclass
class MultiUserReport:
    config: MultiUserConfig
    sessions: int
    per_second: np.ndarray

    @property
    def total_bits(self) -> int:
        return int(self.per_second.sum())


def simulate_multiuser(
    partition: Partition,
    config: MultiUserConfig,
    seed: int,
    n_t: int,
    view_bits: np.ndarray | None = None,
    joint_bits: int | None = None,
    policy: WalkPolicy = WalkPolicy(),
    frame_rate: int = FRAME_RATE,
) -> MultiUserReport:
    """Aggregate server load with n_nu users arriving every second.

    Each arrival starts at a popularity-sampled view and walks for a
    geometric duration with mean t_mean, truncated at the horizon. The
    arrival schedule and walks depend only on the seed, so the three
    representations are compared on identical navigation:
      partitioned: segment deliveries as in simulate_session;
      all_intra:   one intra-coded view payload per first visit (needs
                   view_bits, indexed by view);
      joint_all:   the whole-domain coded representation once per session
                   (needs joint_bits).
    """
    domain = partition.domain
    rep = config.representation
    if rep == "all_intra" and view_bits is None:
        raise ValueError("all_intra needs per-view intra bits")
    if rep == "joint_all" and joint_bits is None:
        raise ValueError("joint_all needs the whole-domain coded size")
    rng = np.random.default_rng(seed)
    per_second = np.zeros(config.duration, dtype=np.int64)
    ball_table = _ball_segment_table(partition, n_t) if rep == "partitioned" else None
    p_end = 1.0 / (config.t_mean * frame_rate)
    sessions = 0
    for s in range(config.duration):
        for _ in range(config.n_nu):
            start = int(rng.choice(domain.size, p=domain.popularity))
            dur = int(rng.geometric(p_end))
            walk_seed = int(rng.integers(0, 2**63 - 1))
            dur = min(dur, (config.duration - s) * frame_rate)
            sessions += 1
            if rep == "joint_all":
                per_second[s] += joint_bits
                continue
            path = random_walk(domain, start, dur, policy, walk_seed)
            if rep == "partitioned":
                trace = simulate_session(partition, path, n_t, frame_rate, ball_table)
                sec = np.minimum(s + np.arange(trace.rate_per_second.size), config.duration - 1)
                np.add.at(per_second, sec, trace.rate_per_second)
            else:  # all_intra: pay each view's intra size on first visit
                views, first_tick = np.unique(path, return_index=True)
                sec = np.minimum(s + first_tick // frame_rate, config.duration - 1)
                np.add.at(per_second, sec, view_bits[views])
    return MultiUserReport(config=config, sessions=sessions, per_second=per_second)


def joint_crossover(
    partition: Partition,
    n_t: int,
    t_values,
    n_nu: int,
    duration: int,
    seed: int,
    joint_bits: int,
    policy: WalkPolicy = WalkPolicy(),
    frame_rate: int = FRAME_RATE,
) -> dict:
    """Sweep mean session duration and find where the partitioned
    representation stops beating whole-domain joint coding.

    Returns the per-T totals and crossover_t: the largest tested T for
    which partitioned < joint_all still holds at every tested T' <= T
    (None when even the smallest T loses; the largest tested T when the
    partitioned representation wins the whole range).
    """
    rows = []
    for t in t_values:
        base = dict(n_nu=n_nu, t_mean=float(t), duration=duration)
        part = simulate_multiuser(
            partition,
            MultiUserConfig(representation="partitioned", **base),
            seed,
            n_t,
            policy=policy,
            frame_rate=frame_rate,
        )
        joint = simulate_multiuser(
            partition,
            MultiUserConfig(representation="joint_all", **base),
            seed,
            n_t,
            joint_bits=joint_bits,
            policy=policy,
            frame_rate=frame_rate,
        )
        rows.append(
            {
                "t_mean": float(t),
                "partitioned_bits": part.total_bits,
                "joint_all_bits": joint.total_bits,
            }
        )
    crossover = None
    for row in sorted(rows, key=lambda r: r["t_mean"]):
        if row["partitioned_bits"] < row["joint_all_bits"]:
            crossover = row["t_mean"]
        else:
            break
    return {"rows": rows, "crossover_t": crossover}
