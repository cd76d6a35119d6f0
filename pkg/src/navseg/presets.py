"""Built-in scene configurations.

Each preset samples every surface at its pixel footprint (spacing = depth /
focal) so rendered views are hole-free and a camera step moves surface
pixels by a whole number of columns. That keeps visibility sets free of
resampling churn, which the occlusion experiments rely on.
"""

from __future__ import annotations

from .geometry import CameraIntrinsics
from .scene import BoxSpec, DomainSpec, PlaneSpec, SceneConfig, Texture

__all__ = ["desk", "gallery", "ledge", "oracle", "toy", "PRESETS", "get_preset"]


def desk() -> SceneConfig:
    """Occluder scene: a wide slab and a small box in front of a far wall.

    120-view line, 0.05 m step, 64x48 views at focal 80. The wall sits at
    4 m (one pixel per step), box faces at 2 m (two pixels per step). The
    slab shadows the wall asymmetrically across the domain, so innovation
    volume depends strongly on where a segment's reference sits.
    """
    intr = CameraIntrinsics(80.0, 64, 48)
    domain = DomainSpec(
        kind="line",
        count=120,
        delta=0.05,
        popularity={"kind": "gaussian"},
    )
    bg = PlaneSpec(
        z=4.0,
        width=9.2,
        height=2.4,
        center_x=3.0,
        center_y=0.0,
        texture=Texture("checker", ((205, 205, 205), (70, 70, 70)), 0.15),
    )
    slab = BoxSpec(
        center=(1.9, 0.0, 2.025),
        size=(2.2, 0.6, 0.05),
        texture=Texture("stripes", ((175, 135, 95), (95, 65, 45)), 0.2),
        pitch=0.025,
    )
    crate = BoxSpec(
        center=(-0.3, 0.0, 2.025),
        size=(0.8, 0.4, 0.05),
        texture=Texture("gradient", ((110, 140, 185), (200, 220, 240)), 0.1),
        pitch=0.025,
    )
    return SceneConfig(
        background=bg,
        boxes=(slab, crate),
        pitch=0.05,
        intrinsics=intr,
        domain=domain,
        name="desk",
    )


def gallery() -> SceneConfig:
    """Two mid-depth boxes flanking a tall near blocker on a 120-view line.

    The blocker at 1 m spans the full frame height and sweeps four pixels
    per step, so disocclusion happens everywhere in the domain at rates
    that differ per object; partitioning gets a more even workload than
    on the desk scene.
    """
    intr = CameraIntrinsics(80.0, 64, 48)
    domain = DomainSpec(
        kind="line",
        count=120,
        delta=0.05,
    )
    bg = PlaneSpec(
        z=4.0,
        width=9.2,
        height=2.4,
        center_x=3.0,
        center_y=0.0,
        texture=Texture("stripes", ((190, 190, 210), (80, 80, 100)), 0.2),
    )
    pedestal = BoxSpec(
        center=(1.3, 0.0, 2.025),
        size=(0.8, 0.5, 0.05),
        texture=Texture("checker", ((180, 170, 150), (95, 90, 110)), 0.15),
        pitch=0.025,
    )
    column = BoxSpec(
        center=(3.0, 0.0, 1.0125),
        size=(0.6, 0.3, 0.025),
        texture=Texture("gradient", ((150, 150, 175), (225, 120, 110)), 0.12),
        pitch=0.0125,
    )
    plinth = BoxSpec(
        center=(4.6, 0.0, 2.025),
        size=(0.6, 0.4, 0.05),
        texture=Texture("checker", ((130, 170, 140), (75, 100, 90)), 0.2),
        pitch=0.025,
    )
    return SceneConfig(
        background=bg,
        boxes=(pedestal, column, plinth),
        pitch=0.05,
        intrinsics=intr,
        domain=domain,
        name="gallery",
    )


def ledge() -> SceneConfig:
    """Asymmetric visibility scene: the wall is narrower than the union
    of view frusta, with different shortfalls per side.

    Views at the left end lose up to 12 background columns and views at
    the right end up to 24, so the number of voxels a view actually sees
    falls off toward both domain ends at different rates. Innovation
    volume against a fixed member set therefore has a single asymmetric
    basin in the reference position. A small centered crate adds texture
    without disturbing that shape.
    """
    intr = CameraIntrinsics(80.0, 64, 48)
    domain = DomainSpec(
        kind="line",
        count=40,
        delta=0.05,
    )
    bg = PlaneSpec(
        z=4.0,
        width=3.35,
        height=2.4,
        center_x=0.675,
        center_y=0.0,
        texture=Texture("checker", ((195, 195, 215), (65, 65, 85)), 0.25),
    )
    crate = BoxSpec(
        center=(0.975, 0.0, 2.025),
        size=(0.4, 0.4, 0.05),
        texture=Texture("stripes", ((185, 130, 60), (95, 60, 30)), 0.1),
        pitch=0.025,
    )
    return SceneConfig(
        background=bg,
        boxes=(crate,),
        pitch=0.05,
        intrinsics=intr,
        domain=domain,
        name="ledge",
    )


def oracle() -> SceneConfig:
    """Small scene sized for exhaustive reference checks.

    Roughly two thousand voxels and 12 views of 32x24 pixels, so a plain
    per-voxel projection loop over every view stays fast.
    """
    intr = CameraIntrinsics(40.0, 32, 24)
    domain = DomainSpec(
        kind="line",
        count=12,
        delta=0.05,
    )
    bg = PlaneSpec(
        z=4.0,
        width=3.8,
        height=2.4,
        center_x=0.275,
        center_y=0.0,
        texture=Texture("checker", ((210, 210, 210), (60, 60, 60)), 0.3),
    )
    box_a = BoxSpec(
        center=(0.2, -0.05, 2.2),
        size=(0.8, 0.6, 0.4),
        texture=Texture("stripes", ((170, 110, 50), (90, 55, 25)), 0.2),
        pitch=0.05,
    )
    box_b = BoxSpec(
        center=(-0.8, 0.25, 2.9),
        size=(0.6, 0.5, 0.2),
        texture=Texture("gradient", ((60, 100, 160), (190, 210, 230)), 0.15),
        pitch=0.0625,
    )
    return SceneConfig(
        background=bg,
        boxes=(box_a, box_b),
        pitch=0.1,
        intrinsics=intr,
        domain=domain,
        name="oracle",
    )


def toy() -> SceneConfig:
    """Three views of two small objects over a near wall.

    The middle view is the natural reference and the outer views each
    disocclude a different sliver, which makes hand-checking innovation
    sets feasible.
    """
    intr = CameraIntrinsics(30.0, 24, 18)
    domain = DomainSpec(
        kind="line",
        count=3,
        delta=0.2,
    )
    bg = PlaneSpec(
        z=3.0,
        width=2.8,
        height=1.8,
        center_x=0.2,
        center_y=0.0,
        texture=Texture("checker", ((200, 200, 200), (75, 75, 75)), 0.25),
    )
    left = BoxSpec(
        center=(-0.3, -0.1, 1.6),
        size=(0.4, 0.4, 0.2),
        texture=Texture("stripes", ((160, 100, 40), (80, 50, 20)), 0.1),
        pitch=0.05,
    )
    right = BoxSpec(
        center=(0.5, 0.1, 1.6),
        size=(0.4, 0.4, 0.2),
        texture=Texture("gradient", ((50, 90, 150), (180, 200, 220)), 0.1),
        pitch=0.05,
    )
    return SceneConfig(
        background=bg,
        boxes=(left, right),
        pitch=0.1,
        intrinsics=intr,
        domain=domain,
        name="toy",
    )


PRESETS = {
    "desk": desk,
    "gallery": gallery,
    "ledge": ledge,
    "oracle": oracle,
    "toy": toy,
}


def get_preset(name: str) -> SceneConfig:
    """Look up a built-in scene by name; raises KeyError with choices."""
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown scene preset {name!r}; choices: {sorted(PRESETS)}") from None
