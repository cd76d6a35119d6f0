"""Procedural scene construction: textured background plane plus axis-aligned
boxes, sampled into a finite voxel table with stable identities."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import CameraIntrinsics, CameraPose


@dataclass(frozen=True)
class Texture:
    """Deterministic procedural surface pattern.

    kind: "checker", "stripes" or "gradient". colors are the two 8-bit base
    colors; cell is the pattern period in meters. A low-amplitude sinusoid is
    mixed in so coded blocks carry nonzero AC energy.
    """

    kind: str = "checker"
    colors: tuple = ((205, 205, 205), (70, 70, 70))
    cell: float = 0.25

    def sample(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """8-bit colors for face-local coordinates (u, v) in meters."""
        c0 = np.asarray(self.colors[0], dtype=np.float64)
        c1 = np.asarray(self.colors[1], dtype=np.float64)
        if self.kind == "checker":
            parity = (np.floor(u / self.cell) + np.floor(v / self.cell)) % 2
            base = np.where(parity[..., None] == 0, c0, c1)
        elif self.kind == "stripes":
            parity = np.floor(u / self.cell) % 2
            base = np.where(parity[..., None] == 0, c0, c1)
        elif self.kind == "gradient":
            t = (u % (4 * self.cell)) / (4 * self.cell)
            base = c0 + (c1 - c0) * t[..., None]
        else:
            raise ValueError(f"unknown texture kind: {self.kind}")
        ripple = 0.5 + 0.5 * np.sin(2 * np.pi * (u * 1.3 + v * 0.7))
        out = base * (0.78 + 0.22 * ripple[..., None])
        return np.clip(np.rint(out), 0, 255).astype(np.uint8)

    def to_json(self) -> dict:
        return {"kind": self.kind, "colors": [list(c) for c in self.colors], "cell": self.cell}

    @classmethod
    def from_json(cls, d) -> "Texture":
        if d is None:
            return cls()
        if isinstance(d, str):
            return cls(kind=d)
        return cls(
            kind=d.get("kind", "checker"),
            colors=tuple(tuple(int(x) for x in c) for c in d.get("colors", cls.colors)),
            cell=float(d.get("cell", cls.cell)),
        )


@dataclass(frozen=True)
class PlaneSpec:
    """Background plane at depth z, centered on (center_x, center_y).

    pitch, when set, oversamples this surface more finely than the global
    pitch (it must not be coarser); near surfaces need a spacing at or
    under their pixel footprint so rendered views have no pinholes.
    """

    z: float
    width: float
    height: float
    texture: Texture = field(default_factory=Texture)
    center_x: float = 0.0
    center_y: float = 0.0
    pitch: float | None = None


@dataclass(frozen=True)
class BoxSpec:
    """Axis-aligned box; all six faces are sampled.

    pitch overrides the global sampling spacing (finer only), matching
    the surface's pixel footprint at its depth.
    """

    center: tuple
    size: tuple
    texture: Texture = field(default_factory=Texture)
    pitch: float | None = None


@dataclass(frozen=True)
class DomainSpec:
    """Pose-grid description carried inside the scene config."""

    kind: str = "line"  # "line" or "grid"
    count: int = 120
    rows: int = 1
    delta: float = 0.05
    origin: CameraPose = field(default_factory=CameraPose)
    metric_weights: tuple = (1.0, 1.0, 1.0, 0.0, 0.0, 0.0)
    popularity: dict = field(default_factory=lambda: {"kind": "uniform"})

    def to_json(self) -> dict:
        d = {
            "type": self.kind,
            "delta": self.delta,
            "origin": self.origin.to_json(),
            "metric_weights": list(self.metric_weights),
            "popularity": dict(self.popularity),
        }
        if self.kind == "grid":
            d["rows"] = self.rows
            d["cols"] = self.count
        else:
            d["count"] = self.count
        return d

    @classmethod
    def from_json(cls, d: dict) -> "DomainSpec":
        kind = d.get("type", "line")
        if kind == "grid":
            count = int(d["cols"])
            rows = int(d["rows"])
        else:
            count = int(d.get("count", 120))
            rows = 1
        return cls(
            kind=kind,
            count=count,
            rows=rows,
            delta=float(d.get("delta", 0.05)),
            origin=CameraPose.from_json(d.get("origin", [0, 0, 0])),
            metric_weights=tuple(float(w) for w in d.get("metric_weights", (1, 1, 1, 0, 0, 0))),
            popularity=dict(d.get("popularity", {"kind": "uniform"})),
        )


@dataclass(frozen=True)
class SceneConfig:
    background: PlaneSpec
    boxes: tuple = ()
    pitch: float = 0.05
    intrinsics: CameraIntrinsics = field(default_factory=lambda: CameraIntrinsics(70.0, 64, 48))
    domain: DomainSpec = field(default_factory=DomainSpec)
    name: str = "custom"

    def to_json(self) -> dict:
        bg = {
            "z": self.background.z,
            "width": self.background.width,
            "height": self.background.height,
            "texture": self.background.texture.to_json(),
            "center": [self.background.center_x, self.background.center_y],
        }
        if self.background.pitch is not None:
            bg["pitch"] = self.background.pitch
        boxes = []
        for b in self.boxes:
            entry = {"center": list(b.center), "size": list(b.size), "texture": b.texture.to_json()}
            if b.pitch is not None:
                entry["pitch"] = b.pitch
            boxes.append(entry)
        return {
            "name": self.name,
            "background": bg,
            "boxes": boxes,
            "pitch": self.pitch,
            "intrinsics": self.intrinsics.to_json(),
            "domain": self.domain.to_json(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "SceneConfig":
        bg = d["background"]
        center = bg.get("center", [0.0, 0.0])
        background = PlaneSpec(
            z=float(bg["z"]),
            width=float(bg["width"]),
            height=float(bg["height"]),
            texture=Texture.from_json(bg.get("texture")),
            center_x=float(center[0]),
            center_y=float(center[1]),
            pitch=float(bg["pitch"]) if bg.get("pitch") is not None else None,
        )
        boxes = tuple(
            BoxSpec(
                center=tuple(float(x) for x in b["center"]),
                size=tuple(float(x) for x in b["size"]),
                texture=Texture.from_json(b.get("texture")),
                pitch=float(b["pitch"]) if b.get("pitch") is not None else None,
            )
            for b in d.get("boxes", [])
        )
        return cls(
            background=background,
            boxes=boxes,
            pitch=float(d["pitch"]),
            intrinsics=CameraIntrinsics.from_json(d["intrinsics"]),
            domain=DomainSpec.from_json(d.get("domain", {})),
            name=d.get("name", "custom"),
        )

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_json(), f, indent=2)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "SceneConfig":
        with open(path) as f:
            return cls.from_json(json.load(f))


@dataclass(frozen=True)
class Voxel:
    id: int
    position: np.ndarray
    color: np.ndarray


class SceneModel:
    """Immutable voxel table; ids are positions' row indices and are stable
    across renders because construction is deterministic."""

    def __init__(self, config: SceneConfig, positions: np.ndarray, colors: np.ndarray):
        self.config = config
        self.positions = positions
        self.colors = colors
        self.positions.setflags(write=False)
        self.colors.setflags(write=False)

    @property
    def voxel_count(self) -> int:
        return self.positions.shape[0]

    def voxel(self, vid: int) -> Voxel:
        return Voxel(vid, self.positions[vid], self.colors[vid])

    def __repr__(self):
        return f"SceneModel({self.config.name!r}, {self.voxel_count} voxels)"


def _grid_1d(extent: float, pitch: float) -> np.ndarray:
    """Cell-centered sample offsets covering [0, extent]."""
    n = max(1, int(round(extent / pitch)))
    return (np.arange(n, dtype=np.float64) + 0.5) * pitch


def _sample_plane(spec: PlaneSpec, pitch: float):
    us = _grid_1d(spec.width, pitch)
    vs = _grid_1d(spec.height, pitch)
    uu, vv = np.meshgrid(us, vs)
    u = uu.ravel()
    v = vv.ravel()
    x = spec.center_x - spec.width / 2 + u
    y = spec.center_y - spec.height / 2 + v
    z = np.full_like(x, spec.z)
    pos = np.stack([x, y, z], axis=1)
    col = spec.texture.sample(u, v)
    return pos, col


def _sample_box(spec: BoxSpec, pitch: float, cam_lo, cam_hi):
    cx, cy, cz = spec.center
    w, h, d = spec.size
    positions = []
    colors = []
    # faces in a fixed order so voxel ids are reproducible; a face whose
    # outer half-space contains no camera position is invisible from every
    # pose, so sampling it would only add dead voxels
    faces = [
        ("z", cz - d / 2, w, h, cam_lo[2] < cz - d / 2),  # front
        ("z", cz + d / 2, w, h, cam_hi[2] > cz + d / 2),  # back
        ("x", cx - w / 2, d, h, cam_lo[0] < cx - w / 2),  # left
        ("x", cx + w / 2, d, h, cam_hi[0] > cx + w / 2),  # right
        ("y", cy - h / 2, w, d, cam_lo[1] < cy - h / 2),  # y-min
        ("y", cy + h / 2, w, d, cam_hi[1] > cy + h / 2),  # y-max
    ]
    for axis, coord, eu, ev, reachable in faces:
        if not reachable:
            continue
        us = _grid_1d(eu, pitch)
        vs = _grid_1d(ev, pitch)
        uu, vv = np.meshgrid(us, vs)
        u = uu.ravel()
        v = vv.ravel()
        if axis == "z":
            x = cx - w / 2 + u
            y = cy - h / 2 + v
            z = np.full_like(x, coord)
        elif axis == "x":
            z = cz - d / 2 + u
            y = cy - h / 2 + v
            x = np.full_like(z, coord)
        else:
            x = cx - w / 2 + u
            z = cz - d / 2 + v
            y = np.full_like(x, coord)
        positions.append(np.stack([x, y, z], axis=1))
        colors.append(spec.texture.sample(u, v))
    if not positions:
        return np.zeros((0, 3)), np.zeros((0, 3))
    return np.concatenate(positions), np.concatenate(colors)


def build_scene(config: SceneConfig) -> SceneModel:
    """Sample every surface of the configured scene onto a voxel grid.

    Identical configs produce identical voxel tables, ids included.
    """
    if config.pitch <= 0:
        raise ValueError("pitch must be positive")
    if config.background.width <= 0 or config.background.height <= 0:
        raise ValueError("background extents must be positive")

    def eff(p):
        if p is None:
            return config.pitch
        if p <= 0 or p > config.pitch:
            raise ValueError("surface pitch must be in (0, pitch]")
        return p

    dom = config.domain
    drows = dom.rows if dom.kind == "grid" else 1
    o = dom.origin
    cam_lo = (o.tx, o.ty, o.tz)
    cam_hi = (
        o.tx + (dom.count - 1) * dom.delta,
        o.ty + (drows - 1) * dom.delta,
        o.tz,
    )
    parts = [_sample_plane(config.background, eff(config.background.pitch))]
    parts += [_sample_box(b, eff(b.pitch), cam_lo, cam_hi) for b in config.boxes]
    positions = np.concatenate([p for p, _ in parts])
    colors = np.concatenate([c for _, c in parts])
    if positions.shape[0] == 0:
        raise ValueError("scene has no voxels")
    return SceneModel(config, positions, colors)
