"""Partitioning the viewpoint domain into navigation segments and picking
references under the combined rate + storage objective."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec import encode_aux, encode_reference
from .innovation import SegmentInnovation
from .navdomain import NavigationDomain, navigation_ball, segment_popularity
from .render import ViewCache


@dataclass(frozen=True)
class CostParams:
    """Knobs of the optimization objective.

    lam weighs storage against expected rate; mu weighs segment count in
    the segment-count search; q is the codec quantizer; n_t is the
    position-report period that bounds the usable segment count.
    """

    lam: float = 0.5
    mu: float = 0.2
    q: float = 16.0
    n_t: int = 5

    def __post_init__(self):
        if self.lam < 0 or self.mu < 0:
            raise ValueError("lambda and mu must be non-negative")
        if self.q < 0:
            raise ValueError("quantizer step must be non-negative")
        if self.n_t < 1:
            raise ValueError("n_t must be at least 1")


@dataclass(frozen=True)
class Segment:
    reference: int
    members: tuple
    innovation: SegmentInnovation
    ref_bits: int
    aux_bits: int

    @property
    def size_bits(self) -> int:
        return self.ref_bits + self.aux_bits

    @property
    def phi_size(self) -> int:
        return self.innovation.size


@dataclass(frozen=True)
class Partition:
    domain: NavigationDomain
    lam: float
    segments: tuple

    def __post_init__(self):
        seen = np.concatenate([np.asarray(s.members, dtype=np.int64) for s in self.segments])
        if np.unique(seen).size != seen.size:
            raise ValueError("segments overlap")
        if seen.size != self.domain.size:
            raise ValueError("segments do not cover the domain")

    @property
    def references(self) -> tuple:
        return tuple(s.reference for s in self.segments)

    @property
    def storage_bits(self) -> int:
        return sum(s.size_bits for s in self.segments)

    @property
    def rate_bits(self) -> float:
        return sum(
            segment_popularity(self.domain, s.members) * s.size_bits for s in self.segments
        )

    @property
    def objective(self) -> float:
        return self.rate_bits + self.lam * self.storage_bits

    def costs(self) -> dict:
        return {
            "storage": self.storage_bits,
            "rate": self.rate_bits,
            "objective": self.objective,
        }

    def segment_of(self) -> np.ndarray:
        """Flat view index -> position of its segment in self.segments."""
        out = np.full(self.domain.size, -1, dtype=np.int64)
        for i, s in enumerate(self.segments):
            out[np.asarray(s.members, dtype=np.int64)] = i
        return out


class SegmentCoster:
    """Memoized coded-size evaluation for (reference, members) candidates.

    Reference-refinement sweeps re-cost the same member sets against many
    candidate references; the member-union and the per-view reference bits
    are each computed once.
    """

    def __init__(self, cache: ViewCache, q: float):
        self.cache = cache
        self.q = float(q)
        self._ref_bits: dict = {}
        self._union: dict = {}
        self._segments: dict = {}

    def ref_bits(self, view: int) -> int:
        if view not in self._ref_bits:
            self._ref_bits[view] = encode_reference(self.cache.view(view), self.q).bits
        return self._ref_bits[view]

    def union_ids(self, members: tuple) -> np.ndarray:
        if members not in self._union:
            sets = [self.cache.ids(m) for m in members]
            self._union[members] = np.unique(np.concatenate(sets))
        return self._union[members]

    def innovation(self, reference: int, members: tuple) -> SegmentInnovation:
        if reference not in members:
            raise ValueError("reference view must belong to the segment")
        phi = np.setdiff1d(
            self.union_ids(members), self.cache.ids(reference), assume_unique=True
        )
        return SegmentInnovation(reference=reference, members=members, phi=phi)

    def segment(self, reference: int, members: tuple) -> Segment:
        key = (reference, members)
        if key not in self._segments:
            innov = self.innovation(reference, members)
            aux = encode_aux(self.cache, innov, self.q)
            self._segments[key] = Segment(
                reference=reference,
                members=members,
                innovation=innov,
                ref_bits=self.ref_bits(reference),
                aux_bits=aux.bits,
            )
        return self._segments[key]


def _check_references(domain: NavigationDomain, references) -> list:
    refs = [int(r) for r in references]
    if not refs:
        raise ValueError("need at least one reference")
    if len(set(refs)) != len(refs):
        raise ValueError("duplicate reference views")
    for r in refs:
        if not (0 <= r < domain.size):
            raise IndexError("reference view out of range")
    return refs


def assign_by_distance(domain: NavigationDomain, references) -> list:
    """Each view joins its metrically nearest reference (ties to the lower
    reference index). Returns member lists aligned with the references."""
    refs = _check_references(domain, references)
    out = [[] for _ in refs]
    order = sorted(range(len(refs)), key=lambda i: refs[i])
    for v in range(domain.size):
        best = min(order, key=lambda i: (domain.view_distance(v, refs[i]), refs[i]))
        out[best].append(v)
    return [sorted(m) for m in out]


def assign_by_similarity(domain: NavigationDomain, cache: ViewCache, references) -> list:
    """Each view joins the reference sharing the most visible voxels;
    ties break by smaller pose distance, then lower reference index."""
    refs = _check_references(domain, references)
    ref_ids = {r: cache.ids(r) for r in refs}
    out = [[] for _ in refs]
    for v in range(domain.size):
        ids_v = cache.ids(v)
        best = min(
            range(len(refs)),
            key=lambda i: (
                -np.intersect1d(ids_v, ref_ids[refs[i]], assume_unique=True).size,
                domain.view_distance(v, refs[i]),
                refs[i],
            ),
        )
        out[best].append(v)
    return [sorted(m) for m in out]


def build_partition(coster: SegmentCoster, lam: float, references, assignment) -> Partition:
    refs = list(references)
    segments = [
        coster.segment(r, tuple(members)) for r, members in zip(refs, assignment)
    ]
    segments.sort(key=lambda s: s.reference)
    return Partition(domain=coster.cache.domain, lam=lam, segments=tuple(segments))


def partition_costs(partition: Partition) -> dict:
    return partition.costs()


def refine_reference(coster: SegmentCoster, members) -> int:
    """Best reference for a fixed member set: the member minimizing coded
    reference + auxiliary bits (ties to the lower index).

    With memberships fixed the global objective separates per segment, so
    the per-segment minimum is also the global refinement step.
    """
    members = tuple(sorted(int(m) for m in members))
    if not members:
        raise ValueError("segment has no members")
    return min(members, key=lambda r: (coster.segment(r, members).size_bits, r))


def reference_sweep(coster: SegmentCoster, members) -> list:
    """Coded cost of every candidate reference of a member set."""
    members = tuple(sorted(int(m) for m in members))
    if not members:
        raise ValueError("segment has no members")
    rows = []
    for r in members:
        seg = coster.segment(r, members)
        rows.append(
            {
                "reference": r,
                "ref_bits": seg.ref_bits,
                "aux_bits": seg.aux_bits,
                "phi_size": seg.phi_size,
                "total_bits": seg.size_bits,
            }
        )
    return rows


def equidistant_references(domain: NavigationDomain, n_v: int) -> list:
    """n_v reference views spread evenly over the domain (middle row of a
    2D grid), at the centers of equal index spans."""
    if n_v < 1:
        raise ValueError("need at least one segment")
    if n_v > domain.cols:
        raise ValueError("more segments than grid columns")
    row = domain.rows // 2
    cols = [int(round((i + 0.5) * domain.cols / n_v)) - 1 for i in range(n_v)]
    return [domain.flat(row, c) for c in cols]


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    step: str  # "assign" or "refine"
    objective: float
    references: tuple


def lloyd_optimize(
    cache: ViewCache,
    n_v: int,
    params: CostParams,
    max_iters: int = 10,
    epsilon: float = 1e-3,
):
    """Alternate similarity assignment and reference refinement from an
    equidistant start; keep the best partition seen.

    The per-half-step objective is recorded in the trace. Iteration stops
    at a reference fixed point, when the relative objective improvement
    falls under epsilon, or after max_iters rounds. Because reassignment
    against union-based innovation is not provably monotone, the returned
    partition is the best observed, not necessarily the last.
    """
    domain = cache.domain
    m = max_segments(domain, params.n_t)
    if not (1 <= n_v <= m):
        raise ValueError(f"n_v must lie in [1, {m}] for n_t={params.n_t}")
    coster = SegmentCoster(cache, params.q)
    refs = equidistant_references(domain, n_v)
    best: Partition | None = None
    trace: list = []
    prev_objective = None
    for iteration in range(1, max_iters + 1):
        assignment = assign_by_similarity(domain, cache, refs)
        part = build_partition(coster, params.lam, refs, assignment)
        trace.append(TraceEntry(iteration, "assign", part.objective, tuple(part.references)))
        if best is None or part.objective < best.objective:
            best = part
        new_refs = [refine_reference(coster, s.members) for s in part.segments]
        refined = build_partition(
            coster, params.lam, new_refs, [s.members for s in part.segments]
        )
        trace.append(
            TraceEntry(iteration, "refine", refined.objective, tuple(refined.references))
        )
        if refined.objective < best.objective:
            best = refined
        if new_refs == list(refs):
            break
        if prev_objective is not None:
            rel = (prev_objective - refined.objective) / abs(prev_objective)
            if rel < epsilon:
                break
        prev_objective = refined.objective
        refs = new_refs
    return best, trace


def max_segments(domain: NavigationDomain, n_t: int) -> int:
    """Largest useful segment count: domain size over the size of one
    navigation ball at an interior view."""
    if n_t < 1:
        raise ValueError("n_t must be at least 1")
    if domain.rows == 1:
        ball = 2 * n_t - 1
    else:
        center = domain.flat(domain.rows // 2, domain.cols // 2)
        ball = navigation_ball(domain, center, n_t).size
    return max(1, domain.size // ball)


@dataclass(frozen=True)
class NvRecord:
    n_v: int
    mean_ref_bits: float
    mean_aux_bits: float
    objective: float


@dataclass(frozen=True)
class NvEstimate:
    records: tuple
    n_v_star: int
    mu: float
    n_t: int


def select_num_segments(cache: ViewCache, params: CostParams) -> NvEstimate:
    """Sweep the segment count over [1, M] on equidistant partitions and
    pick the count minimizing (N_V + mu) times the mean segment size.

    Reference placement is deliberately not optimized inside the sweep;
    ties go to the smaller count.
    """
    domain = cache.domain
    m = max_segments(domain, params.n_t)
    coster = SegmentCoster(cache, params.q)
    records = []
    for n_v in range(1, m + 1):
        refs = equidistant_references(domain, n_v)
        assignment = assign_by_distance(domain, refs)
        segs = [coster.segment(r, tuple(mem)) for r, mem in zip(refs, assignment)]
        ybar = float(np.mean([s.ref_bits for s in segs]))
        phibar = float(np.mean([s.aux_bits for s in segs]))
        records.append(
            NvRecord(
                n_v=n_v,
                mean_ref_bits=ybar,
                mean_aux_bits=phibar,
                objective=(n_v + params.mu) * (ybar + phibar),
            )
        )
    star = min(records, key=lambda r: (r.objective, r.n_v)).n_v
    return NvEstimate(records=tuple(records), n_v_star=star, mu=params.mu, n_t=params.n_t)


def partition_to_json(partition: Partition, params: CostParams, trace=()) -> dict:
    return {
        "lambda": partition.lam,
        "q": params.q,
        "n_t": params.n_t,
        "segments": [
            {
                "reference": s.reference,
                "members": list(s.members),
                "ref_bits": s.ref_bits,
                "aux_bits": s.aux_bits,
                "phi_size": s.phi_size,
            }
            for s in partition.segments
        ],
        "costs": partition.costs(),
        "trace": [
            {
                "iter": t.iteration,
                "step": t.step,
                "objective": t.objective,
                "refs": list(t.references),
            }
            for t in trace
        ],
    }


def partition_from_json(doc: dict, cache: ViewCache) -> Partition:
    """Rebuild a partition (with exact coded sizes) from its document."""
    coster = SegmentCoster(cache, float(doc["q"]))
    segments = []
    for s in doc["segments"]:
        seg = coster.segment(int(s["reference"]), tuple(int(m) for m in s["members"]))
        if seg.ref_bits != s["ref_bits"] or seg.aux_bits != s["aux_bits"]:
            raise ValueError("stored coded sizes do not match this scene build")
        segments.append(seg)
    segments.sort(key=lambda s: s.reference)
    return Partition(domain=cache.domain, lam=float(doc["lambda"]), segments=tuple(segments))
