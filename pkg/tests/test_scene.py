"""Scene sampling: textures, surface grids, face culling, and config IO."""

import math

import numpy as np
import pytest

from navseg.geometry import CameraIntrinsics, CameraPose
from navseg.presets import PRESETS, get_preset
from navseg.scene import (
    BoxSpec,
    DomainSpec,
    PlaneSpec,
    SceneConfig,
    Texture,
    build_scene,
)


def expected_samples(extent, pitch):
    return max(1, int(round(extent / pitch)))


def texture_oracle(tex, u, v):
    """Recompute one texture sample with scalar arithmetic."""
    if tex.kind == "checker":
        base = tex.colors[(math.floor(u / tex.cell) + math.floor(v / tex.cell)) % 2]
    elif tex.kind == "stripes":
        base = tex.colors[math.floor(u / tex.cell) % 2]
    else:
        t = (u % (4 * tex.cell)) / (4 * tex.cell)
        base = [a + (b - a) * t for a, b in zip(*tex.colors)]
    ripple = 0.5 + 0.5 * math.sin(2 * math.pi * (u * 1.3 + v * 0.7))
    return [
        int(np.clip(np.rint(c * (0.78 + 0.22 * ripple)), 0, 255)) for c in base
    ]


@pytest.mark.parametrize("kind", ["checker", "stripes", "gradient"])
def test_texture_matches_scalar_recomputation(kind):
    tex = Texture(kind=kind, colors=((200, 40, 90), (10, 220, 130)), cell=0.2)
    rng = np.random.default_rng(12)
    u = rng.uniform(0.0, 3.0, size=40)
    v = rng.uniform(0.0, 2.0, size=40)
    got = tex.sample(u, v)
    assert got.dtype == np.uint8
    for i in range(u.size):
        assert got[i].tolist() == texture_oracle(tex, u[i], v[i])


def test_checker_alternates_across_cell_boundary():
    tex = Texture(kind="checker", colors=((255, 255, 255), (0, 0, 0)), cell=1.0)
    dark = tex.sample(np.array([1.5]), np.array([0.5]))[0]
    light = tex.sample(np.array([0.5]), np.array([0.5]))[0]
    assert light.min() > dark.max()


def test_stripes_ignore_the_v_coordinate():
    tex = Texture(kind="stripes", colors=((250, 0, 0), (0, 0, 250)), cell=0.5)
    u = np.full(5, 0.25)
    v = np.array([0.0, 1.0 / 0.7, 2.0 / 0.7, 3.0 / 0.7, 4.0 / 0.7])
    # same u and a full ripple period apart in v: identical samples
    got = tex.sample(u, v)
    assert (got == got[0]).all()


def test_unknown_texture_kind_rejected():
    with pytest.raises(ValueError):
        Texture(kind="noise").sample(np.zeros(1), np.zeros(1))


def test_texture_json_round_trip():
    tex = Texture(kind="gradient", colors=((1, 2, 3), (4, 5, 6)), cell=0.125)
    assert Texture.from_json(tex.to_json()) == tex
    assert Texture.from_json(None) == Texture()
    assert Texture.from_json("stripes").kind == "stripes"


def line_domain(count=12, delta=0.05, origin=CameraPose()):
    return DomainSpec(kind="line", count=count, delta=delta, origin=origin)


def plane_only_config(width=1.0, height=0.5, pitch=0.05):
    return SceneConfig(
        background=PlaneSpec(z=4.0, width=width, height=height),
        pitch=pitch,
        domain=line_domain(),
    )


def test_plane_sample_count_and_layout():
    config = plane_only_config(width=1.0, height=0.5, pitch=0.05)
    scene = build_scene(config)
    nu = expected_samples(1.0, 0.05)
    nv = expected_samples(0.5, 0.05)
    assert scene.voxel_count == nu * nv
    assert (scene.positions[:, 2] == 4.0).all()
    xs = np.unique(scene.positions[:, 0])
    assert xs.size == nu
    # cell centers, so the first sample sits half a pitch inside the edge
    assert xs[0] == pytest.approx(-0.5 + 0.025)
    assert xs[-1] == pytest.approx(0.5 - 0.025)


def test_rounding_keeps_cell_size_close_to_pitch():
    # 0.52 / 0.05 rounds to 10 cells, not 11
    config = plane_only_config(width=0.52, height=0.05, pitch=0.05)
    assert build_scene(config).voxel_count == 10


def box_config(box, domain=None):
    return SceneConfig(
        background=PlaneSpec(z=4.0, width=2.0, height=1.0),
        boxes=(box,),
        pitch=0.05,
        domain=domain or line_domain(),
    )


def test_box_faces_behind_every_camera_are_culled():
    # cameras on a line from x=0 to x=0.55 at z=0, looking along +z
    box = BoxSpec(center=(0.25, 0.0, 2.0), size=(0.2, 0.2, 0.1))
    scene = build_scene(box_config(box))
    bg = expected_samples(2.0, 0.05) * expected_samples(1.0, 0.05)
    box_z = scene.positions[bg:, 2]
    front = 2.0 - 0.1 / 2  # matches the sampler's arithmetic bit for bit
    back = 2.0 + 0.1 / 2
    assert (box_z < back).all()  # the rear face never faces a camera
    assert (box_z == front).sum() == 4 * 4  # front face is fully sampled


def test_side_faces_cull_against_the_camera_span():
    # box strictly right of every camera: only its left face can be seen
    domain = line_domain(count=4, delta=0.05)
    box = BoxSpec(center=(1.0, 0.0, 2.0), size=(0.2, 0.2, 0.1))
    scene = build_scene(box_config(box, domain))
    xs = scene.positions[:, 0]
    assert (xs == 1.0 - 0.2 / 2).any()  # facing plane is sampled
    assert not (xs == 1.0 + 0.2 / 2).any()  # averted plane is not
    # and mirrored when the box sits left of every camera
    box = BoxSpec(center=(-1.0, 0.0, 2.0), size=(0.2, 0.2, 0.1))
    scene = build_scene(box_config(box, domain))
    xs = scene.positions[:, 0]
    assert (xs == -1.0 + 0.2 / 2).any()
    assert not (xs == -1.0 - 0.2 / 2).any()


def test_horizontal_faces_cull_against_the_camera_height():
    # a line of cameras at y=0 sees the top face of a box below them
    # (y is image-down, so "below" is positive y) and never its underside
    box = BoxSpec(center=(0.1, 0.8, 2.0), size=(0.2, 0.2, 0.1))
    scene = build_scene(box_config(box))
    ys = scene.positions[:, 1]
    assert (ys == 0.8 - 0.2 / 2).any()
    assert not (ys == 0.8 + 0.2 / 2).any()


def test_per_surface_pitch_overrides_the_scene_pitch():
    fine = BoxSpec(center=(0.2, 0.0, 2.0), size=(0.2, 0.2, 0.1), pitch=0.025)
    coarse = BoxSpec(center=(0.2, 0.0, 2.0), size=(0.2, 0.2, 0.1))
    n_fine = build_scene(box_config(fine)).voxel_count
    n_coarse = build_scene(box_config(coarse)).voxel_count
    bg = expected_samples(2.0, 0.05) * expected_samples(1.0, 0.05)
    assert (n_fine - bg) == 4 * (n_coarse - bg)


def test_surface_pitch_must_refine_the_scene_pitch():
    too_coarse = BoxSpec(center=(0.2, 0.0, 2.0), size=(0.2, 0.2, 0.1), pitch=0.1)
    with pytest.raises(ValueError):
        build_scene(box_config(too_coarse))
    negative = BoxSpec(center=(0.2, 0.0, 2.0), size=(0.2, 0.2, 0.1), pitch=-0.05)
    with pytest.raises(ValueError):
        build_scene(box_config(negative))


@pytest.mark.parametrize(
    "config",
    [
        plane_only_config(pitch=-1.0),
        plane_only_config(width=-2.0),
        plane_only_config(height=0.0),
    ],
)
def test_invalid_geometry_rejected(config):
    with pytest.raises(ValueError):
        build_scene(config)


def test_build_is_deterministic():
    config = get_preset("toy")
    a = build_scene(config)
    b = build_scene(config)
    assert np.array_equal(a.positions, b.positions)
    assert np.array_equal(a.colors, b.colors)


def test_voxel_accessor_and_immutability():
    scene = build_scene(get_preset("toy"))
    vox = scene.voxel(5)
    assert vox.id == 5
    assert np.array_equal(vox.position, scene.positions[5])
    assert np.array_equal(vox.color, scene.colors[5])
    with pytest.raises(ValueError):
        scene.positions[0, 0] = 99.0


def test_config_json_round_trip_preserves_the_voxel_table(tmp_path):
    config = get_preset("gallery")
    path = tmp_path / "gallery.json"
    config.save(path)
    again = SceneConfig.load(path)
    assert again == config
    a = build_scene(config)
    b = build_scene(again)
    assert np.array_equal(a.positions, b.positions)
    assert np.array_equal(a.colors, b.colors)


def test_domain_spec_json_round_trip_both_kinds():
    line = DomainSpec(kind="line", count=40, delta=0.1, origin=CameraPose(1.0))
    assert DomainSpec.from_json(line.to_json()) == line
    grid = DomainSpec(kind="grid", count=6, rows=4, delta=0.2)
    again = DomainSpec.from_json(grid.to_json())
    assert again == grid
    assert again.rows == 4 and again.count == 6


@pytest.mark.parametrize(
    "name,count",
    [
        ("desk", 11584),
        ("gallery", 11248),
        ("ledge", 3536),
        ("oracle", 1208),
        ("toy", 696),
    ],
)
def test_preset_voxel_counts_are_stable(name, count):
    """Pinned sizes guard against accidental preset or sampling drift; every
    calibrated threshold in the acceptance tests assumes these tables."""
    assert build_scene(get_preset(name)).voxel_count == count


def test_preset_catalog_is_complete():
    assert set(PRESETS) == {"desk", "gallery", "ledge", "oracle", "toy"}
    with pytest.raises(KeyError):
        get_preset("missing")
