"""Segment costing, view assignment, Lloyd refinement, and the
segment-count search."""

import numpy as np
import pytest

from navseg.codec import encode_aux, encode_reference
from navseg.geometry import CameraIntrinsics, CameraPose
from navseg.innovation import segment_innovation
from navseg.navdomain import NavigationDomain, navigation_ball, segment_popularity
from navseg.partition import (
    CostParams,
    Partition,
    SegmentCoster,
    assign_by_distance,
    assign_by_similarity,
    build_partition,
    equidistant_references,
    lloyd_optimize,
    max_segments,
    partition_from_json,
    partition_to_json,
    reference_sweep,
    refine_reference,
    select_num_segments,
)
from navseg.scene import DomainSpec

Q = 16.0


@pytest.fixture(scope="module")
def coster(oracle_bundle):
    _, _, cache = oracle_bundle
    return SegmentCoster(cache, Q)


@pytest.fixture(scope="module")
def two_segment_partition(oracle_bundle, coster):
    _, _, cache = oracle_bundle
    refs = [2, 9]
    assignment = assign_by_similarity(cache.domain, cache, refs)
    return build_partition(coster, 0.5, refs, assignment)


def grid_domain(rows=4, cols=6):
    spec = DomainSpec(
        kind="grid",
        count=cols,
        rows=rows,
        delta=0.1,
        origin=CameraPose(1.0, -0.5, 0.0),
        metric_weights=(1, 1, 1, 0, 0, 0),
    )
    return NavigationDomain.from_spec(spec, CameraIntrinsics(70.0, 64, 48))


# ---------------------------------------------------------------- parameters


def test_cost_params_validation():
    CostParams()
    CostParams(lam=0.0, mu=0.0, q=0.0, n_t=1)
    with pytest.raises(ValueError):
        CostParams(lam=-0.1)
    with pytest.raises(ValueError):
        CostParams(mu=-1.0)
    with pytest.raises(ValueError):
        CostParams(q=-4.0)
    with pytest.raises(ValueError):
        CostParams(n_t=0)


# ------------------------------------------------------------------- coster


def test_coster_reference_bits_match_the_codec(oracle_bundle, coster):
    _, _, cache = oracle_bundle
    for v in (0, 5, 11):
        assert coster.ref_bits(v) == encode_reference(cache.view(v), Q).bits


def test_coster_union_and_innovation(oracle_bundle, coster):
    _, _, cache = oracle_bundle
    members = (3, 4, 5)
    union = coster.union_ids(members)
    expected = np.unique(np.concatenate([cache.ids(m) for m in members]))
    assert np.array_equal(union, expected)
    innov = coster.innovation(4, members)
    assert np.array_equal(innov.phi, np.setdiff1d(union, cache.ids(4)))
    with pytest.raises(ValueError):
        coster.innovation(7, members)


def test_coster_segment_bits_and_memoization(oracle_bundle, coster):
    _, _, cache = oracle_bundle
    members = (3, 4, 5)
    seg = coster.segment(4, members)
    assert seg.ref_bits == encode_reference(cache.view(4), Q).bits
    innov = segment_innovation(cache, 4, members)
    assert seg.aux_bits == encode_aux(cache, innov, Q).bits
    assert seg.size_bits == seg.ref_bits + seg.aux_bits
    assert seg.phi_size == innov.size
    assert coster.segment(4, members) is seg


# --------------------------------------------------------------- assignment


def test_assign_by_distance_sends_each_view_to_its_nearest_reference(oracle_bundle):
    _, _, cache = oracle_bundle
    domain = cache.domain
    refs = [2, 9]
    out = assign_by_distance(domain, refs)
    seen = sorted(v for members in out for v in members)
    assert seen == list(range(domain.size))
    for i, members in enumerate(out):
        assert members == sorted(members)
        for v in members:
            mine = domain.view_distance(v, refs[i])
            for j, other in enumerate(refs):
                if j == i:
                    continue
                theirs = domain.view_distance(v, other)
                assert (mine, refs[i]) <= (theirs, other)


def test_assign_by_distance_alignment_follows_the_reference_order(oracle_bundle):
    _, _, cache = oracle_bundle
    forward = assign_by_distance(cache.domain, [2, 9])
    backward = assign_by_distance(cache.domain, [9, 2])
    assert backward == [forward[1], forward[0]]


def test_assign_rejects_bad_references(oracle_bundle):
    _, _, cache = oracle_bundle
    with pytest.raises(ValueError):
        assign_by_distance(cache.domain, [])
    with pytest.raises(ValueError):
        assign_by_distance(cache.domain, [3, 3])
    with pytest.raises(IndexError):
        assign_by_distance(cache.domain, [0, 12])
    with pytest.raises(IndexError):
        assign_by_similarity(cache.domain, cache, [-1])


def test_assign_by_similarity_maximizes_shared_voxels(oracle_bundle):
    _, _, cache = oracle_bundle
    domain = cache.domain
    refs = [2, 9]
    out = assign_by_similarity(domain, cache, refs)
    seen = sorted(v for members in out for v in members)
    assert seen == list(range(domain.size))
    for i, members in enumerate(out):
        for v in members:
            ids_v = cache.ids(v)
            mine = (
                -np.intersect1d(ids_v, cache.ids(refs[i]), assume_unique=True).size,
                domain.view_distance(v, refs[i]),
                refs[i],
            )
            for j, other in enumerate(refs):
                if j == i:
                    continue
                theirs = (
                    -np.intersect1d(ids_v, cache.ids(other), assume_unique=True).size,
                    domain.view_distance(v, other),
                    other,
                )
                assert mine <= theirs


# ---------------------------------------------------------------- partition


def test_build_partition_orders_segments_by_reference(oracle_bundle, coster):
    _, _, cache = oracle_bundle
    refs = [9, 2]
    assignment = assign_by_distance(cache.domain, refs)
    part = build_partition(coster, 0.5, refs, assignment)
    assert part.references == (2, 9)
    assert not (part.segment_of() < 0).any()


def test_partition_cost_properties_recompute(two_segment_partition):
    part = two_segment_partition
    assert part.storage_bits == sum(s.size_bits for s in part.segments)
    rate = sum(
        segment_popularity(part.domain, s.members) * s.size_bits for s in part.segments
    )
    assert part.rate_bits == pytest.approx(rate)
    assert part.objective == pytest.approx(part.rate_bits + 0.5 * part.storage_bits)
    assert part.costs() == {
        "storage": part.storage_bits,
        "rate": part.rate_bits,
        "objective": part.objective,
    }


def test_partition_segment_of_maps_members_to_their_segment(two_segment_partition):
    part = two_segment_partition
    seg_of = part.segment_of()
    for i, s in enumerate(part.segments):
        assert (seg_of[list(s.members)] == i).all()


def test_partition_rejects_overlap_and_gaps(oracle_bundle, coster, two_segment_partition):
    _, _, cache = oracle_bundle
    s0, s1 = two_segment_partition.segments
    with pytest.raises(ValueError):
        Partition(domain=cache.domain, lam=0.5, segments=(s0, s0, s1))
    with pytest.raises(ValueError):
        Partition(domain=cache.domain, lam=0.5, segments=(s0,))


# --------------------------------------------------- reference refinement


def test_reference_sweep_rows_cover_every_member(coster):
    members = (3, 4, 5, 6, 7)
    rows = reference_sweep(coster, members)
    assert [r["reference"] for r in rows] == list(members)
    for row in rows:
        seg = coster.segment(row["reference"], members)
        assert row["ref_bits"] == seg.ref_bits
        assert row["aux_bits"] == seg.aux_bits
        assert row["phi_size"] == seg.phi_size
        assert row["total_bits"] == seg.ref_bits + seg.aux_bits


def test_refine_reference_is_the_sweep_argmin(coster):
    members = (3, 4, 5, 6, 7)
    rows = reference_sweep(coster, members)
    best = min(rows, key=lambda r: (r["total_bits"], r["reference"]))
    assert refine_reference(coster, members) == best["reference"]


def test_refinement_rejects_empty_segments(coster):
    with pytest.raises(ValueError):
        refine_reference(coster, ())
    with pytest.raises(ValueError):
        reference_sweep(coster, ())


# ------------------------------------------------------- reference seeding


def test_equidistant_references_on_a_line(desk_bundle):
    _, _, cache = desk_bundle
    domain = cache.domain
    assert equidistant_references(domain, 1) == [59]
    assert equidistant_references(domain, 6) == [9, 29, 49, 69, 89, 109]
    refs = equidistant_references(domain, 13)
    assert refs == sorted(set(refs))
    assert all(0 <= r < domain.size for r in refs)


def test_equidistant_references_use_the_middle_grid_row():
    domain = grid_domain(rows=4, cols=6)
    refs = equidistant_references(domain, 3)
    assert refs == [domain.flat(2, 0), domain.flat(2, 2), domain.flat(2, 4)]


def test_equidistant_references_validation(desk_bundle):
    _, _, cache = desk_bundle
    with pytest.raises(ValueError):
        equidistant_references(cache.domain, 0)
    with pytest.raises(ValueError):
        equidistant_references(cache.domain, 121)


def test_max_segments_divides_domain_by_ball_size(desk_bundle, oracle_bundle, toy_bundle):
    assert max_segments(desk_bundle[2].domain, 5) == 120 // 9
    assert max_segments(oracle_bundle[2].domain, 2) == 12 // 3
    assert max_segments(toy_bundle[2].domain, 5) == 1
    grid = grid_domain(rows=4, cols=6)
    ball = navigation_ball(grid, grid.flat(2, 3), 2).size
    assert max_segments(grid, 2) == grid.size // ball
    with pytest.raises(ValueError):
        max_segments(grid, 0)


# ------------------------------------------------------- lloyd optimization


def test_lloyd_rejects_out_of_range_segment_counts(oracle_bundle):
    _, _, cache = oracle_bundle
    params = CostParams(lam=0.5, q=Q, n_t=2)
    with pytest.raises(ValueError):
        lloyd_optimize(cache, 0, params)
    with pytest.raises(ValueError):
        lloyd_optimize(cache, 5, params)


def test_lloyd_trace_alternates_and_tracks_the_best(oracle_bundle):
    _, _, cache = oracle_bundle
    params = CostParams(lam=0.5, q=Q, n_t=2)
    best, trace = lloyd_optimize(cache, 2, params)
    assert len(best.segments) == 2
    assert [t.step for t in trace] == ["assign", "refine"] * (len(trace) // 2)
    iters = [t.iteration for t in trace]
    assert iters == sorted(iters) and iters[0] == 1
    assert best.objective == min(t.objective for t in trace)
    again, trace2 = lloyd_optimize(cache, 2, params)
    assert again.references == best.references
    assert [t.objective for t in trace2] == [t.objective for t in trace]


def test_lloyd_with_one_segment_finds_the_global_reference(oracle_bundle):
    _, _, cache = oracle_bundle
    params = CostParams(lam=0.5, q=Q, n_t=2)
    best, _ = lloyd_optimize(cache, 1, params)
    coster = SegmentCoster(cache, Q)
    everything = tuple(range(cache.domain.size))
    assert best.references == (refine_reference(coster, everything),)
    assert best.segments[0].members == everything


# ----------------------------------------------------- segment-count search


def test_select_num_segments_records_recompute(oracle_bundle):
    _, _, cache = oracle_bundle
    params = CostParams(lam=0.5, mu=0.2, q=Q, n_t=2)
    est = select_num_segments(cache, params)
    assert est.mu == params.mu and est.n_t == params.n_t
    assert [r.n_v for r in est.records] == list(
        range(1, max_segments(cache.domain, params.n_t) + 1)
    )
    for rec in est.records:
        refs = equidistant_references(cache.domain, rec.n_v)
        assignment = assign_by_distance(cache.domain, refs)
        refbits, auxbits = [], []
        for r, members in zip(refs, assignment):
            refbits.append(encode_reference(cache.view(r), Q).bits)
            innov = segment_innovation(cache, r, tuple(members))
            auxbits.append(encode_aux(cache, innov, Q).bits)
        assert rec.mean_ref_bits == pytest.approx(np.mean(refbits))
        assert rec.mean_aux_bits == pytest.approx(np.mean(auxbits))
        assert rec.objective == pytest.approx(
            (rec.n_v + params.mu) * (rec.mean_ref_bits + rec.mean_aux_bits)
        )
    best = min(est.records, key=lambda r: (r.objective, r.n_v))
    assert est.n_v_star == best.n_v


# ------------------------------------------------------------ serialization


def test_partition_json_round_trip(oracle_bundle, two_segment_partition):
    _, _, cache = oracle_bundle
    params = CostParams(lam=0.5, q=Q, n_t=2)
    doc = partition_to_json(two_segment_partition, params)
    assert doc["lambda"] == 0.5 and doc["q"] == Q and doc["n_t"] == 2
    assert doc["costs"] == two_segment_partition.costs()
    back = partition_from_json(doc, cache)
    assert back.references == two_segment_partition.references
    for a, b in zip(back.segments, two_segment_partition.segments):
        assert a.members == b.members
        assert a.ref_bits == b.ref_bits
        assert a.aux_bits == b.aux_bits
    assert back.objective == pytest.approx(two_segment_partition.objective)


def test_partition_json_rejects_stale_coded_sizes(oracle_bundle, two_segment_partition):
    _, _, cache = oracle_bundle
    doc = partition_to_json(two_segment_partition, CostParams(lam=0.5, q=Q, n_t=2))
    doc["segments"][0]["ref_bits"] += 1
    with pytest.raises(ValueError):
        partition_from_json(doc, cache)


def test_partition_json_keeps_the_trace(two_segment_partition):
    entries = [
        type("T", (), {"iteration": 1, "step": "assign", "objective": 2.0, "references": (2, 9)})()
    ]
    doc = partition_to_json(two_segment_partition, CostParams(q=Q), trace=entries)
    assert doc["trace"] == [
        {"iter": 1, "step": "assign", "objective": 2.0, "refs": [2, 9]}
    ]
