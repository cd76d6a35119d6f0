"""Point-projection rendering of voxel scenes and per-view visibility sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import CameraIntrinsics, CameraPose
from .kernels import project_points, zbuffer_select
from .scene import SceneModel

EMPTY = -1


class EmptyViewError(RuntimeError):
    """Raised when a rendered view contains no scene voxel at all."""


@dataclass
class ViewImage:
    """One rendered viewpoint: color, metric depth, and the id of the voxel
    that won each pixel (EMPTY where nothing projects)."""

    pose: CameraPose
    intrinsics: CameraIntrinsics
    color: np.ndarray  # (H, W, 3) uint8
    depth: np.ndarray  # (H, W) float64, 0 where empty
    vid: np.ndarray  # (H, W) int64, EMPTY where empty

    @property
    def occupied(self) -> np.ndarray:
        return self.vid != EMPTY


def _project_scene(scene: SceneModel, pose: CameraPose, intr: CameraIntrinsics):
    r = pose.rotation()
    t = pose.translation()
    return project_points(
        scene.positions, r, t, intr.focal, intr.cx, intr.cy, intr.width, intr.height
    )


def render_view(scene: SceneModel, pose: CameraPose, intr: CameraIntrinsics) -> ViewImage:
    """Project every voxel and keep the nearest one per pixel.

    Depth ties go to the lower voxel id, which makes renders reproducible
    and gives each pixel a single well-defined source voxel.
    """
    pix, depth = _project_scene(scene, pose, intr)
    winner, wdepth = zbuffer_select(pix, depth, intr.width * intr.height)
    vid = winner.reshape(intr.height, intr.width)
    if not (vid != EMPTY).any():
        raise EmptyViewError(f"no voxel projects into the view at {pose}")
    color = np.zeros((intr.height, intr.width, 3), dtype=np.uint8)
    mask = vid != EMPTY
    color[mask] = scene.colors[vid[mask]]
    zmap = np.where(mask, wdepth.reshape(intr.height, intr.width), 0.0)
    return ViewImage(pose=pose, intrinsics=intr, color=color, depth=zmap, vid=vid)


@dataclass(frozen=True)
class VisibilitySet:
    """Sorted ids of the voxels that win at least one pixel of a view."""

    view_index: int
    ids: np.ndarray

    @property
    def size(self) -> int:
        return int(self.ids.shape[0])


def visible_set(view: ViewImage, view_index: int = -1) -> VisibilitySet:
    ids = np.unique(view.vid[view.vid != EMPTY])
    return VisibilitySet(view_index=view_index, ids=ids)


def project_voxel(
    position: np.ndarray, pose: CameraPose, intr: CameraIntrinsics
):
    """Pixel coordinates and camera depth for one world point.

    Returns (px, py, depth) or None when the point falls behind the camera
    or outside the frame. Uses the same arithmetic as the full renderer.
    """
    pix, depth = project_points(
        np.asarray(position, dtype=np.float64).reshape(1, 3),
        pose.rotation(),
        pose.translation(),
        intr.focal,
        intr.cx,
        intr.cy,
        intr.width,
        intr.height,
    )
    if pix[0] < 0:
        return None
    return int(pix[0]) % intr.width, int(pix[0]) // intr.width, float(depth[0])


class ViewCache:
    """Memoizes per-view renders, visibility sets and whole-scene projections.

    Partition search touches the same views thousands of times; the cache
    turns those lookups into dictionary hits. Projections are cached for all
    voxels at once so innovation transfers reduce to index slicing.
    """

    def __init__(self, scene: SceneModel, domain):
        self.scene = scene
        self.domain = domain
        self._views: dict = {}
        self._vsets: dict = {}
        self._projs: dict = {}

    def view(self, idx: int) -> ViewImage:
        if idx not in self._views:
            self._views[idx] = render_view(
                self.scene, self.domain.pose(idx), self.domain.intrinsics
            )
        return self._views[idx]

    def vset(self, idx: int) -> VisibilitySet:
        if idx not in self._vsets:
            self._vsets[idx] = visible_set(self.view(idx), idx)
        return self._vsets[idx]

    def ids(self, idx: int) -> np.ndarray:
        return self.vset(idx).ids

    def proj(self, idx: int):
        """(pix, depth) of every scene voxel in view idx; pix is -1 off-frame."""
        if idx not in self._projs:
            self._projs[idx] = _project_scene(
                self.scene, self.domain.pose(idx), self.domain.intrinsics
            )
        return self._projs[idx]
