"""Camera poses, intrinsics, and the shared pinhole projection conventions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics; principal point defaults to the image center."""

    focal: float
    width: int
    height: int
    cx: float | None = None
    cy: float | None = None

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        if self.focal <= 0:
            raise ValueError("focal length must be positive")
        if self.cx is None:
            object.__setattr__(self, "cx", (self.width - 1) / 2.0)
        if self.cy is None:
            object.__setattr__(self, "cy", (self.height - 1) / 2.0)

    def to_json(self) -> dict:
        return {
            "focal": self.focal,
            "width": self.width,
            "height": self.height,
            "cx": self.cx,
            "cy": self.cy,
        }

    @classmethod
    def from_json(cls, d: dict) -> "CameraIntrinsics":
        return cls(
            focal=float(d["focal"]),
            width=int(d["width"]),
            height=int(d["height"]),
            cx=float(d["cx"]) if "cx" in d else None,
            cy=float(d["cy"]) if "cy" in d else None,
        )


@dataclass(frozen=True)
class CameraPose:
    """Camera position and orientation: translation in meters, rotation in radians.

    With zero rotation the camera looks along world +z; +x is image right and
    +y is image down.
    """

    tx: float = 0.0
    ty: float = 0.0
    tz: float = 0.0
    theta_x: float = 0.0
    theta_y: float = 0.0
    theta_z: float = 0.0

    def __post_init__(self):
        for v in (self.tx, self.ty, self.tz, self.theta_x, self.theta_y, self.theta_z):
            if not math.isfinite(v):
                raise ValueError("pose components must be finite")

    def as_vector(self) -> np.ndarray:
        """Six-component parameter vector [tx ty tz theta_x theta_y theta_z]."""
        return np.array(
            [self.tx, self.ty, self.tz, self.theta_x, self.theta_y, self.theta_z],
            dtype=np.float64,
        )

    def translation(self) -> np.ndarray:
        return np.array([self.tx, self.ty, self.tz], dtype=np.float64)

    def rotation(self) -> np.ndarray:
        """Camera-to-world rotation matrix Rz(tz) @ Ry(ty) @ Rx(tx)."""
        cx, sx = math.cos(self.theta_x), math.sin(self.theta_x)
        cy, sy = math.cos(self.theta_y), math.sin(self.theta_y)
        cz, sz = math.cos(self.theta_z), math.sin(self.theta_z)
        rx = np.array([[1, 0, 0], [0, cx, -sx], [0, sx, cx]], dtype=np.float64)
        ry = np.array([[cy, 0, sy], [0, 1, 0], [-sy, 0, cy]], dtype=np.float64)
        rz = np.array([[cz, -sz, 0], [sz, cz, 0], [0, 0, 1]], dtype=np.float64)
        return rz @ ry @ rx

    def to_json(self) -> list:
        return [self.tx, self.ty, self.tz, self.theta_x, self.theta_y, self.theta_z]

    @classmethod
    def from_json(cls, v) -> "CameraPose":
        vals = [float(x) for x in v]
        if len(vals) == 3:
            vals += [0.0, 0.0, 0.0]
        if len(vals) != 6:
            raise ValueError("pose must have 3 or 6 components")
        return cls(*vals)


def backproject_pixel(
    px: float, py: float, depth: float, pose: CameraPose, intr: CameraIntrinsics
) -> np.ndarray:
    """World position of the point seen at pixel (px, py) at the given depth."""
    xc = (px - intr.cx) * depth / intr.focal
    yc = (py - intr.cy) * depth / intr.focal
    cam = np.array([xc, yc, depth], dtype=np.float64)
    return pose.rotation() @ cam + pose.translation()


def backproject_grid(
    depth: np.ndarray, pose: CameraPose, intr: CameraIntrinsics
) -> np.ndarray:
    """Back-project a full depth image to an (H, W, 3) array of world points."""
    h, w = depth.shape
    px = np.arange(w, dtype=np.float64)[None, :]
    py = np.arange(h, dtype=np.float64)[:, None]
    xc = (px - intr.cx) * depth / intr.focal
    yc = (py - intr.cy) * depth / intr.focal
    cam = np.stack([xc, yc, depth], axis=-1)
    r = pose.rotation()
    return cam @ r.T + pose.translation()
