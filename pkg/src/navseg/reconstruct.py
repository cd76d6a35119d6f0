"""View reconstruction from a coded reference plus auxiliary voxels:
depth-based reprojection, splatting, and constrained hole interpolation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codec import EncodedAux, EncodedReference, decode_aux, decode_reference
from .kernels import project_points, zbuffer_select
from .navdomain import NavigationDomain
from .render import EMPTY, ViewImage

PEAK = 255.0


class ProtocolViolation(RuntimeError):
    """Requested a view outside the segment that was delivered."""


@dataclass(frozen=True)
class QualityReport:
    """Reconstruction error against a ground-truth render, by region."""

    mse: float
    psnr: float
    lossless: bool
    disoccluded_mse: float
    disoccluded_psnr: float
    disoccluded_pixels: int
    interpolated_mse: float
    interpolated_psnr: float
    interpolated_pixels: int
    interpolated_fraction: float


@dataclass
class Reconstruction:
    view: ViewImage
    interpolated: np.ndarray  # (H, W) bool: filled by interpolation (or unfilled)
    unfilled: int
    touched_ids: np.ndarray  # sorted ids of every voxel the decoder handled
    report: QualityReport | None


def _psnr(mse: float) -> float:
    if mse <= 0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / mse)


def _region_mse(a: np.ndarray, b: np.ndarray, mask: np.ndarray) -> float:
    if not mask.any():
        return 0.0
    d = a[mask].astype(np.float64) - b[mask].astype(np.float64)
    return float((d * d).mean())


def _nearest_fill(depth, color, vid, axis: int, tau_d: float):
    """One scanline interpolation pass along the given axis.

    Each empty pixel copies its nearest filled neighbor on the line; when
    both sides exist and disagree in depth by more than tau_d, the farther
    (background) side wins regardless of distance.
    """
    if axis == 0:
        depth, color, vid = depth.T, np.transpose(color, (1, 0, 2)), vid.T
    h, w = vid.shape
    filled = vid != EMPTY
    cols = np.arange(w)[None, :].repeat(h, axis=0)
    left = np.where(filled, cols, -1)
    left = np.maximum.accumulate(left, axis=1)
    right = np.where(filled, cols, w)
    right = np.flip(np.minimum.accumulate(np.flip(right, axis=1), axis=1), axis=1)
    rows = np.arange(h)[:, None].repeat(w, axis=1)
    has_l = left >= 0
    has_r = right < w
    lc = np.clip(left, 0, w - 1)
    rc = np.clip(right, 0, w - 1)
    zl = depth[rows, lc]
    zr = depth[rows, rc]
    dist_l = cols - left
    dist_r = right - cols
    both = has_l & has_r
    # nearest neighbor by default (ties to the left), background side on
    # a depth conflict
    use_left = np.where(
        both & (np.abs(zl - zr) > tau_d),
        zl >= zr,
        np.where(both, dist_l <= dist_r, has_l),
    )
    src = np.where(use_left, lc, rc)
    can = filled | has_l | has_r
    target = ~filled & can
    ty, tx = np.nonzero(target)
    sx = src[ty, tx]
    color[ty, tx] = color[ty, sx]
    depth[ty, tx] = depth[ty, sx]
    vid[ty, tx] = vid[ty, sx]
    return target if axis == 1 else target.T


def reconstruct_view(
    ref: EncodedReference,
    aux: EncodedAux,
    target: int,
    domain: NavigationDomain,
    truth: ViewImage | None = None,
    tau_d: float = 0.25,
) -> Reconstruction:
    """Synthesize the target view from one coded segment.

    Decodes the reference, forward-projects its pixels through the decoded
    depth, splats the decoded auxiliary voxels into the same z-buffer, and
    interpolates whatever stays empty. The decoder only ever reads coded
    data; touched_ids records which source voxels it handled so tests can
    audit that discipline. A ground-truth render, when supplied, is used
    strictly for the quality report after assembly.
    """
    if target not in aux.members:
        raise ProtocolViolation(f"view {target} is not a member of the delivered segment")
    intr = ref.intrinsics
    dec = decode_reference(ref)
    ys, xs = np.nonzero(dec.mask)
    z = dec.depth[ys, xs]
    xc = (xs - intr.cx) * z / intr.focal
    yc = (ys - intr.cy) * z / intr.focal
    cam = np.stack([xc, yc, z], axis=1)
    r = dec.pose.rotation()
    ref_world = cam @ r.T + dec.pose.translation()
    ref_colors = dec.color[ys, xs]
    ref_ids = dec.vid_map[ys, xs].astype(np.int64)

    voxels = decode_aux(aux)
    points = np.concatenate([ref_world, voxels.positions])
    colors = np.concatenate([ref_colors, voxels.colors]).astype(np.uint8)
    ids = np.concatenate([ref_ids, voxels.ids])

    pose_t = domain.pose(target)
    pix, depth = project_points(
        points, pose_t.rotation(), pose_t.translation(),
        intr.focal, intr.cx, intr.cy, intr.width, intr.height,
    )
    winner, wdepth = zbuffer_select(pix, depth, intr.width * intr.height)
    h, w = intr.height, intr.width
    grid = winner.reshape(h, w)
    occupied = grid >= 0
    out_color = np.zeros((h, w, 3), dtype=np.uint8)
    out_color[occupied] = colors[grid[occupied]]
    out_depth = np.where(occupied, wdepth.reshape(h, w), 0.0)
    out_vid = np.where(occupied, ids[np.clip(grid, 0, None)], EMPTY)

    row_fill = _nearest_fill(out_depth, out_color, out_vid, 1, tau_d)
    col_fill = _nearest_fill(out_depth, out_color, out_vid, 0, tau_d)
    interpolated = row_fill | col_fill
    unfilled = int((out_vid == EMPTY).sum())
    interpolated |= out_vid == EMPTY

    touched = np.unique(ids)
    view = ViewImage(pose=pose_t, intrinsics=intr, color=out_color, depth=out_depth, vid=out_vid)

    report = None
    if truth is not None:
        ref_visible = np.unique(ref_ids)
        truth_occ = truth.vid != EMPTY
        disocc = truth_occ & ~np.isin(truth.vid, ref_visible)
        mse = _region_mse(view.color, truth.color, np.ones((h, w), dtype=bool))
        report = QualityReport(
            mse=mse,
            psnr=_psnr(mse),
            lossless=mse == 0,
            disoccluded_mse=_region_mse(view.color, truth.color, disocc),
            disoccluded_psnr=_psnr(_region_mse(view.color, truth.color, disocc)),
            disoccluded_pixels=int(disocc.sum()),
            interpolated_mse=_region_mse(view.color, truth.color, interpolated),
            interpolated_psnr=_psnr(_region_mse(view.color, truth.color, interpolated)),
            interpolated_pixels=int(interpolated.sum()),
            interpolated_fraction=float(interpolated.mean()),
        )
    return Reconstruction(
        view=view,
        interpolated=interpolated,
        unfilled=unfilled,
        touched_ids=touched,
        report=report,
    )
