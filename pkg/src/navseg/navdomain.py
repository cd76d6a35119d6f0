"""Discrete viewpoint domains: pose grids, the weighted pose metric,
navigation balls and view popularity."""

from __future__ import annotations

import math

import numpy as np

from .geometry import CameraIntrinsics, CameraPose
from .scene import DomainSpec

DEFAULT_WEIGHTS = (1.0, 1.0, 1.0, 0.0, 0.0, 0.0)


def distance(a: CameraPose, b: CameraPose, weights=DEFAULT_WEIGHTS) -> float:
    """Weighted Euclidean distance between two poses.

    Weights apply per component of the 6-vector (translation then Euler
    angles) and must be non-negative.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (6,):
        raise ValueError("metric weights must have 6 components")
    if (w < 0).any():
        raise ValueError("metric weights must be non-negative")
    d = a.as_vector() - b.as_vector()
    return math.sqrt(float(np.dot(w, d * d)))


class NavigationDomain:
    """A rows x cols grid of camera poses with spacing delta.

    A line domain is the rows == 1 case. Flat view indices are row-major.
    """

    def __init__(
        self,
        poses,
        rows: int,
        cols: int,
        delta: float,
        intrinsics: CameraIntrinsics,
        metric_weights=DEFAULT_WEIGHTS,
        popularity: np.ndarray | None = None,
    ):
        if rows < 1 or cols < 1:
            raise ValueError("domain must have at least one row and column")
        if len(poses) != rows * cols:
            raise ValueError("pose count must equal rows * cols")
        if delta <= 0:
            raise ValueError("delta must be positive")
        w = np.asarray(metric_weights, dtype=np.float64)
        if w.shape != (6,) or (w < 0).any():
            raise ValueError("metric weights must be 6 non-negative numbers")
        self.poses = tuple(poses)
        self.rows = rows
        self.cols = cols
        self.delta = float(delta)
        self.intrinsics = intrinsics
        self.metric_weights = w
        self.metric_weights.setflags(write=False)
        self._vectors = np.stack([p.as_vector() for p in self.poses])
        if popularity is None:
            popularity = np.full(len(self.poses), 1.0 / len(self.poses))
        popularity = np.asarray(popularity, dtype=np.float64)
        if popularity.shape != (len(self.poses),):
            raise ValueError("popularity must have one weight per view")
        if (popularity < 0).any() or not math.isclose(popularity.sum(), 1.0, abs_tol=1e-9):
            raise ValueError("popularity must be a distribution over views")
        self.popularity = popularity
        self.popularity.setflags(write=False)

    @property
    def size(self) -> int:
        return len(self.poses)

    def pose(self, idx: int) -> CameraPose:
        return self.poses[idx]

    def rc(self, idx: int):
        return idx // self.cols, idx % self.cols

    def flat(self, row: int, col: int) -> int:
        if not (0 <= row < self.rows and 0 <= col < self.cols):
            raise IndexError("grid coordinate out of range")
        return row * self.cols + col

    def view_distance(self, i: int, j: int) -> float:
        d = self._vectors[i] - self._vectors[j]
        return math.sqrt(float(np.dot(self.metric_weights, d * d)))

    @classmethod
    def from_spec(cls, spec: DomainSpec, intrinsics: CameraIntrinsics) -> "NavigationDomain":
        rows = spec.rows if spec.kind == "grid" else 1
        cols = spec.count
        o = spec.origin
        poses = [
            CameraPose(
                o.tx + c * spec.delta,
                o.ty + r * spec.delta,
                o.tz,
                o.theta_x,
                o.theta_y,
                o.theta_z,
            )
            for r in range(rows)
            for c in range(cols)
        ]
        pop = _popularity_from_spec(spec.popularity, rows, cols)
        return cls(poses, rows, cols, spec.delta, intrinsics, spec.metric_weights, pop)


def _popularity_from_spec(spec: dict, rows: int, cols: int) -> np.ndarray:
    kind = spec.get("kind", "uniform")
    n = rows * cols
    if kind == "uniform":
        return np.full(n, 1.0 / n)
    if kind == "gaussian":
        mean = spec.get("mean")
        sigma = spec.get("sigma", max(rows, cols) / 4.0)
        if rows == 1:
            mu = (cols - 1) / 2.0 if mean is None else float(mean)
            i = np.arange(cols, dtype=np.float64)
            w = np.exp(-0.5 * ((i - mu) / float(sigma)) ** 2)
        else:
            mr, mc = ((rows - 1) / 2.0, (cols - 1) / 2.0) if mean is None else mean
            sr, sc = (sigma, sigma) if np.isscalar(sigma) else sigma
            r = np.arange(rows, dtype=np.float64)[:, None]
            c = np.arange(cols, dtype=np.float64)[None, :]
            w = np.exp(-0.5 * (((r - mr) / sr) ** 2 + ((c - mc) / sc) ** 2)).ravel()
        return w / w.sum()
    raise ValueError(f"unknown popularity kind: {kind}")


def navigation_ball(domain: NavigationDomain, center: int, n_t: int) -> np.ndarray:
    """Views strictly closer than n_t * delta to the center, center included.

    The center belongs to its own ball even with n_t == 0, so a ball is
    never empty. Returns sorted flat indices.
    """
    if not (0 <= center < domain.size):
        raise IndexError("center view out of range")
    if n_t < 0:
        raise ValueError("n_t must be non-negative")
    radius = n_t * domain.delta
    d = domain._vectors - domain._vectors[center]
    dist = np.sqrt((domain.metric_weights * d * d).sum(axis=1))
    hit = dist < radius
    hit[center] = True
    return np.flatnonzero(hit).astype(np.int64)


def segment_popularity(domain: NavigationDomain, members) -> float:
    """Total popularity mass of a set of views."""
    m = np.asarray(members, dtype=np.int64)
    if m.size and (m.min() < 0 or m.max() >= domain.size):
        raise IndexError("member view out of range")
    if np.unique(m).size != m.size:
        raise ValueError("members must be distinct")
    return float(domain.popularity[m].sum())
