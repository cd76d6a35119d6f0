"""Shared fixtures: preset scenes, caches, and the reconstruction matrix.

Scene builds and partition optimizations are session scoped because the
acceptance tests reuse the same artifacts many times and rebuilding them
per test would dominate the suite's runtime.
"""

import numpy as np
import pytest

from navseg.codec import encode_aux, encode_reference
from navseg.innovation import SegmentInnovation, segment_innovation
from navseg.navdomain import NavigationDomain
from navseg.partition import CostParams, lloyd_optimize
from navseg.presets import get_preset
from navseg.reconstruct import reconstruct_view
from navseg.render import ViewCache
from navseg.scene import build_scene

MATRIX_Q = 16.0


def build_bundle(name):
    config = get_preset(name)
    scene = build_scene(config)
    domain = NavigationDomain.from_spec(config.domain, config.intrinsics)
    return config, scene, ViewCache(scene, domain)


@pytest.fixture(scope="session")
def toy_bundle():
    return build_bundle("toy")


@pytest.fixture(scope="session")
def oracle_bundle():
    return build_bundle("oracle")


@pytest.fixture(scope="session")
def ledge_bundle():
    return build_bundle("ledge")


@pytest.fixture(scope="session")
def desk_bundle():
    return build_bundle("desk")


@pytest.fixture(scope="session")
def gallery_bundle():
    return build_bundle("gallery")


@pytest.fixture(scope="session")
def desk_partition(desk_bundle):
    """Optimized 6-segment partition of the desk scene, with its trace."""
    _, _, cache = desk_bundle
    return lloyd_optimize(cache, 6, CostParams(lam=0.5, q=MATRIX_Q, n_t=5))


@pytest.fixture(scope="session")
def gallery_partition(gallery_bundle):
    _, _, cache = gallery_bundle
    return lloyd_optimize(cache, 6, CostParams(lam=0.5, q=MATRIX_Q, n_t=5))


def reconstruction_matrix(cache, partition):
    """Reconstruct every member of every segment, with and without the
    auxiliary voxels, and keep the numbers the quality criteria look at.

    The reference member is skipped: it has no disoccluded region and its
    reconstruction is the coded reference itself.
    """
    records = []
    for si, seg in enumerate(partition.segments):
        inn = segment_innovation(cache, seg.reference, seg.members)
        ref_enc = encode_reference(cache.view(seg.reference), MATRIX_Q)
        aux_enc = encode_aux(cache, inn, MATRIX_Q)
        aux_none = encode_aux(
            cache,
            SegmentInnovation(seg.reference, seg.members, np.empty(0, dtype=np.int64)),
            MATRIX_Q,
        )
        allowed = np.union1d(cache.ids(seg.reference), inn.phi)
        for m in seg.members:
            if m == seg.reference:
                continue
            truth = cache.view(m)
            rec = reconstruct_view(ref_enc, aux_enc, m, cache.domain, truth=truth)
            bare = reconstruct_view(ref_enc, aux_none, m, cache.domain, truth=truth)
            records.append(
                {
                    "segment": si,
                    "member": m,
                    "psnr": rec.report.psnr,
                    "interp_fraction": rec.report.interpolated_fraction,
                    "disocc_pixels": rec.report.disoccluded_pixels,
                    "disocc_mse": rec.report.disoccluded_mse,
                    "disocc_mse_bare": bare.report.disoccluded_mse,
                    "unfilled": rec.unfilled,
                    "touched_outside": int(
                        np.setdiff1d(rec.touched_ids, allowed).size
                    ),
                }
            )
    return records


@pytest.fixture(scope="session")
def desk_matrix(desk_bundle, desk_partition):
    return reconstruction_matrix(desk_bundle[2], desk_partition[0])


@pytest.fixture(scope="session")
def gallery_matrix(gallery_bundle, gallery_partition):
    return reconstruction_matrix(gallery_bundle[2], gallery_partition[0])
