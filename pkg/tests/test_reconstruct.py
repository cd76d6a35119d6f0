"""Decoder-side view synthesis: protocol checks, the reference self test,
the touched-voxel audit, and quality-report arithmetic."""

import math

import numpy as np
import pytest

from navseg.codec import encode_aux, encode_reference
from navseg.innovation import SegmentInnovation, segment_innovation
from navseg.reconstruct import ProtocolViolation, reconstruct_view
from navseg.render import EMPTY


@pytest.fixture(scope="module")
def coded_segment(oracle_bundle):
    _, _, cache = oracle_bundle
    members = (3, 4, 5, 6, 7)
    innov = segment_innovation(cache, 5, members)
    ref = encode_reference(cache.view(5), 16.0)
    aux = encode_aux(cache, innov, 16.0)
    return cache, innov, ref, aux


def empty_innovation(reference, members):
    return SegmentInnovation(
        reference=reference, members=members, phi=np.empty(0, dtype=np.int64)
    )


def test_requesting_a_view_outside_the_segment_is_a_protocol_violation(coded_segment):
    cache, _, ref, aux = coded_segment
    with pytest.raises(ProtocolViolation):
        reconstruct_view(ref, aux, 9, cache.domain)


def test_lossless_reference_reconstructs_itself_exactly(oracle_bundle):
    _, _, cache = oracle_bundle
    truth = cache.view(5)
    ref = encode_reference(truth, 0.0)
    aux = encode_aux(cache, empty_innovation(5, (5,)), 0.0)
    rec = reconstruct_view(ref, aux, 5, cache.domain, truth=truth)
    occ = truth.vid != EMPTY
    assert np.array_equal(rec.view.vid[occ], truth.vid[occ])
    assert np.array_equal(rec.view.color[occ], truth.color[occ])
    assert np.abs(rec.view.depth[occ] - truth.depth[occ]).max() < 1e-3


def test_decoder_touches_only_reference_and_innovation_voxels(coded_segment):
    cache, innov, ref, aux = coded_segment
    allowed = np.union1d(cache.ids(5), innov.phi)
    for target in innov.members:
        rec = reconstruct_view(ref, aux, target, cache.domain)
        assert np.array_equal(rec.touched_ids, allowed)


def test_reconstruction_fields_are_mutually_consistent(coded_segment):
    cache, _, ref, aux = coded_segment
    rec = reconstruct_view(ref, aux, 7, cache.domain)
    assert rec.report is None
    assert rec.interpolated.dtype == np.bool_
    assert rec.interpolated.shape == rec.view.vid.shape
    assert rec.unfilled == int((rec.view.vid == EMPTY).sum())
    # whatever stayed empty is flagged as interpolated output
    assert rec.interpolated[rec.view.vid == EMPTY].all()


def test_quality_report_recomputes_from_the_images(coded_segment):
    cache, _, ref, aux = coded_segment
    truth = cache.view(7)
    rec = reconstruct_view(ref, aux, 7, cache.domain, truth=truth)
    rep = rec.report
    h, w = truth.vid.shape

    diff = rec.view.color.astype(np.float64) - truth.color.astype(np.float64)
    mse = float((diff * diff).mean())
    assert rep.mse == pytest.approx(mse)
    assert rep.lossless == (rep.mse == 0)
    if rep.mse > 0:
        assert rep.psnr == pytest.approx(10 * math.log10(255.0**2 / rep.mse))

    def region_mse(mask):
        return float((diff[mask] ** 2).mean()) if mask.any() else 0.0

    disocc = (truth.vid != EMPTY) & ~np.isin(truth.vid, cache.ids(5))
    assert rep.disoccluded_pixels == int(disocc.sum())
    assert rep.disoccluded_mse == pytest.approx(region_mse(disocc))

    assert rep.interpolated_pixels == int(rec.interpolated.sum())
    assert rep.interpolated_fraction == pytest.approx(rep.interpolated_pixels / (h * w))
    assert rep.interpolated_mse == pytest.approx(region_mse(rec.interpolated))


def test_zero_error_report_pins_the_sentinels(oracle_bundle):
    _, _, cache = oracle_bundle
    truth = cache.view(5)
    ref = encode_reference(truth, 0.0)
    aux = encode_aux(cache, empty_innovation(5, (5,)), 0.0)
    rec = reconstruct_view(ref, aux, 5, cache.domain, truth=truth)
    rep = rec.report
    if rep.disoccluded_pixels == 0:
        assert rep.disoccluded_mse == 0.0
        assert rep.disoccluded_psnr == math.inf
    if rep.lossless:
        assert rep.psnr == math.inf
