"""Block-DCT coding of reference views and auxiliary innovation voxels.

Rate accounting is an order-0 entropy estimate of the quantized symbol
streams, rounded up per 8x8 block. Container headers and the instrumentation
sidebands (pixel-to-voxel id maps) are not counted in the bit sizes; the
README documents the exact accounting rules.
"""

from __future__ import annotations

import io
import math
import struct
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .geometry import CameraIntrinsics, CameraPose
from .innovation import SegmentInnovation
from .kernels import project_points, zbuffer_select
from .render import EMPTY, ViewImage

BLOCK = 8
DEPTH_SCALE = 1000.0  # depth symbols are millimeters
DEPTH_Q_RATIO = 4.0  # depth quantizer = q / 4 (finer than color)
OVERFLOW_RECORD_BITS = 152  # id u32 + position 3xf32 + color 3xu8
MAGIC = b"NSG1"
VERSION = 1


@lru_cache(maxsize=None)
def dct_matrix(n: int = BLOCK) -> np.ndarray:
    """Orthonormal DCT-II basis; C @ x applies the transform to columns."""
    k = np.arange(n, dtype=np.float64)[:, None]
    i = np.arange(n, dtype=np.float64)[None, :]
    c = np.cos(np.pi * (2 * i + 1) * k / (2 * n))
    c[0] *= math.sqrt(1.0 / n)
    c[1:] *= math.sqrt(2.0 / n)
    c.setflags(write=False)
    return c


def _blockify(plane: np.ndarray):
    """Split a 2D plane into 8x8 blocks, edge-padding as needed.

    Returns (blocks (nb,8,8), nby, nbx, padded).
    """
    h, w = plane.shape
    ph = (-h) % BLOCK
    pw = (-w) % BLOCK
    padded = ph > 0 or pw > 0
    if padded:
        plane = np.pad(plane, ((0, ph), (0, pw)), mode="edge")
    nby = plane.shape[0] // BLOCK
    nbx = plane.shape[1] // BLOCK
    blocks = (
        plane.reshape(nby, BLOCK, nbx, BLOCK)
        .transpose(0, 2, 1, 3)
        .reshape(nby * nbx, BLOCK, BLOCK)
    )
    return np.ascontiguousarray(blocks), nby, nbx, padded


def _unblockify(blocks: np.ndarray, nby: int, nbx: int, h: int, w: int) -> np.ndarray:
    full = (
        blocks.reshape(nby, nbx, BLOCK, BLOCK)
        .transpose(0, 2, 1, 3)
        .reshape(nby * BLOCK, nbx * BLOCK)
    )
    return np.ascontiguousarray(full[:h, :w])


def block_dct(blocks: np.ndarray) -> np.ndarray:
    c = dct_matrix()
    return np.einsum("ij,bjk,lk->bil", c, blocks, c, optimize=True)


def block_idct(coefs: np.ndarray) -> np.ndarray:
    c = dct_matrix()
    return np.einsum("ji,bjk,kl->bil", c, coefs, c, optimize=True)


def _entropy_bits(symbols: np.ndarray) -> int:
    """Order-0 entropy of the symbol stream, rounded up per block.

    The probability model is the global histogram over the whole stream,
    so repeated blocks stay cheap while rare symbols pay their surprise.
    """
    if symbols.size == 0:
        return 0
    flat = symbols.reshape(symbols.shape[0], -1)
    vals, counts = np.unique(flat, return_counts=True)
    cost = -np.log2(counts / flat.size)
    per_symbol = cost[np.searchsorted(vals, flat)]
    return int(np.ceil(per_symbol.sum(axis=1)).sum())


@dataclass
class PlaneCode:
    """Quantized symbols of one image plane (or of its coded blocks)."""

    symbols: np.ndarray  # (nb, 8, 8) int64
    step: float
    nby: int
    nbx: int
    height: int
    width: int
    bits: int
    padded: bool


def _encode_plane(plane: np.ndarray, step: float, coded: np.ndarray | None = None) -> PlaneCode:
    """Transform-code one plane. step == 0 stores raw rounded samples
    (lossless for integer inputs). coded selects the blocks to keep."""
    h, w = plane.shape
    blocks, nby, nbx, padded = _blockify(np.asarray(plane, dtype=np.float64))
    if coded is not None:
        blocks = blocks[coded]
    if step == 0:
        symbols = np.rint(blocks).astype(np.int64)
    else:
        symbols = np.rint(block_dct(blocks) / step).astype(np.int64)
    return PlaneCode(symbols, float(step), nby, nbx, h, w, _entropy_bits(symbols), padded)


def _decode_plane(code: PlaneCode, coded: np.ndarray | None = None) -> np.ndarray:
    nb = code.nby * code.nbx
    if code.step == 0:
        values = code.symbols.astype(np.float64)
    else:
        values = block_idct(code.symbols.astype(np.float64) * code.step)
    if coded is not None:
        blocks = np.zeros((nb, BLOCK, BLOCK), dtype=np.float64)
        blocks[coded] = values
    else:
        blocks = values
    return _unblockify(blocks, code.nby, code.nbx, code.height, code.width)


@dataclass
class EncodedReference:
    """Intra-coded reference view: three color planes plus a depth plane.

    vid_map is an instrumentation sideband (which voxel produced each
    pixel); it is carried for decoder-knowledge audits and excluded from
    the bit size.
    """

    view_index: int
    pose: CameraPose
    intrinsics: CameraIntrinsics
    q: float
    color: tuple  # 3 PlaneCode
    depth: PlaneCode
    mask: np.ndarray | None  # None when every pixel is occupied
    vid_map: np.ndarray
    bits: int

    @property
    def padded(self) -> bool:
        return self.depth.padded


@dataclass
class DecodedReference:
    pose: CameraPose
    intrinsics: CameraIntrinsics
    color: np.ndarray  # (H, W, 3) uint8
    depth: np.ndarray  # (H, W) float64 meters, 0 where unoccupied
    mask: np.ndarray  # (H, W) bool
    vid_map: np.ndarray


def encode_reference(view: ViewImage, q: float) -> EncodedReference:
    """Code a reference view's color and depth with 8x8 block DCT.

    q is the color quantizer step; depth uses q / 4 on millimeter values.
    q == 0 is the lossless mode: raw samples are entropy-sized without a
    transform. Dimensions that are not multiples of 8 are edge-padded and
    the result is flagged as padded.
    """
    if q < 0:
        raise ValueError("quantizer step must be non-negative")
    h, w = view.vid.shape
    occupied = view.vid != EMPTY
    full = bool(occupied.all())
    depth_mm = np.rint(view.depth * DEPTH_SCALE)
    color = view.color.astype(np.float64)
    if not full:
        # fill unoccupied pixels with the occupied mean so the transform
        # does not spend bits on the void; the mask restores it at decode
        for ch in range(3):
            plane = color[:, :, ch]
            plane[~occupied] = np.rint(plane[occupied].mean()) if occupied.any() else 0
        depth_mm = depth_mm.copy()
        depth_mm[~occupied] = np.rint(depth_mm[occupied].mean()) if occupied.any() else 0
    dq = 0.0 if q == 0 else q / DEPTH_Q_RATIO
    planes = tuple(_encode_plane(color[:, :, ch], q) for ch in range(3))
    depth_code = _encode_plane(depth_mm, dq)
    bits = sum(p.bits for p in planes) + depth_code.bits
    bits += 1 if full else h * w  # occupancy: 1 flag bit, or a raw bitmap
    return EncodedReference(
        view_index=-1,
        pose=view.pose,
        intrinsics=view.intrinsics,
        q=float(q),
        color=planes,
        depth=depth_code,
        mask=None if full else occupied.copy(),
        vid_map=view.vid.copy(),
        bits=bits,
    )


def decode_reference(enc: EncodedReference) -> DecodedReference:
    h = enc.depth.height
    w = enc.depth.width
    color = np.stack([_decode_plane(p) for p in enc.color], axis=2)
    color = np.clip(np.rint(color), 0, 255).astype(np.uint8)
    depth = _decode_plane(enc.depth) / DEPTH_SCALE
    mask = np.ones((h, w), dtype=bool) if enc.mask is None else enc.mask.copy()
    color[~mask] = 0
    depth = np.where(mask, depth, 0.0)
    return DecodedReference(
        pose=enc.pose,
        intrinsics=enc.intrinsics,
        color=color,
        depth=depth,
        mask=mask,
        vid_map=enc.vid_map.copy(),
    )


@dataclass
class EncodedAux:
    """Coded segment innovation: a masked atlas image at one member view
    plus raw overflow records for voxels the atlas could not host."""

    members: tuple
    reference: int
    atlas_view: int
    pose: CameraPose | None
    intrinsics: CameraIntrinsics
    q: float
    occupancy: np.ndarray | None  # (H, W) bool
    coded_blocks: np.ndarray | None  # (nb,) bool
    color: tuple | None
    depth: PlaneCode | None
    vid_map: np.ndarray | None  # instrumentation sideband
    overflow_ids: np.ndarray
    overflow_pos: np.ndarray
    overflow_color: np.ndarray
    phi_size: int
    bits: int

    @property
    def empty(self) -> bool:
        return self.phi_size == 0


@dataclass
class AuxVoxels:
    """Decoded innovation voxels ready to splat."""

    ids: np.ndarray  # (m,) int64
    positions: np.ndarray  # (m, 3) float64
    colors: np.ndarray  # (m, 3) uint8


def encode_aux(cache, seg: SegmentInnovation, q: float) -> EncodedAux:
    """Pack a segment's innovation voxels into one atlas image.

    Every member view is tried as the atlas viewpoint; the one onto which
    the most innovation voxels project without colliding wins (ties to the
    lower view index). Colliding and out-of-frame voxels are stored as raw
    overflow records. An empty innovation costs exactly zero bits.
    """
    if q < 0:
        raise ValueError("quantizer step must be non-negative")
    intr = cache.domain.intrinsics
    phi = seg.phi
    if phi.size == 0:
        return EncodedAux(
            members=seg.members,
            reference=seg.reference,
            atlas_view=-1,
            pose=None,
            intrinsics=intr,
            q=float(q),
            occupancy=None,
            coded_blocks=None,
            color=None,
            depth=None,
            vid_map=None,
            overflow_ids=np.empty(0, dtype=np.int64),
            overflow_pos=np.empty((0, 3), dtype=np.float64),
            overflow_color=np.empty((0, 3), dtype=np.uint8),
            phi_size=0,
            bits=0,
        )
    n_pixels = intr.width * intr.height
    best = None
    for m in seg.members:
        pix, depth = cache.proj(m)
        winner, wdepth = zbuffer_select(pix[phi], depth[phi], n_pixels)
        placed = int((winner >= 0).sum())
        if best is None or placed > best[0]:
            best = (placed, m, winner, wdepth)
    placed, atlas_view, winner, wdepth = best
    h, w = intr.height, intr.width
    grid = winner.reshape(h, w)
    occupancy = grid >= 0
    vid_map = np.where(occupancy, phi[np.clip(grid, 0, None)], EMPTY)
    scene = cache.scene
    wdepth_img = wdepth.reshape(h, w)
    pose_a = cache.domain.pose(atlas_view)
    rot_a = pose_a.rotation()
    t_a = pose_a.translation()
    dq = 0.0 if q == 0 else q / DEPTH_Q_RATIO

    def build_planes(occ):
        depth_mm = np.where(occ, np.rint(wdepth_img * DEPTH_SCALE), 0.0)
        color = np.zeros((h, w, 3), dtype=np.float64)
        color[occ] = scene.colors[vid_map[occ]]
        occ_blocks, nby, nbx, _ = _blockify(occ.astype(np.float64))
        flat_occ = occ_blocks.reshape(occ_blocks.shape[0], -1).astype(bool)
        coded = flat_occ.any(axis=1)
        n_occ = np.maximum(flat_occ.sum(axis=1), 1)

        def fill_holes(plane):
            # each coded block's holes take its occupied mean before the DCT
            blocks, _, _, _ = _blockify(plane)
            flat = blocks.reshape(blocks.shape[0], -1)
            means = np.rint((flat * flat_occ).sum(axis=1) / n_occ)
            flat[~flat_occ] = np.broadcast_to(means[:, None], flat.shape)[~flat_occ]
            return _unblockify(blocks, nby, nbx, h, w)

        planes = tuple(_encode_plane(fill_holes(color[:, :, ch]), q, coded) for ch in range(3))
        depth_code = _encode_plane(fill_holes(depth_mm), dq, coded)
        return planes, depth_code, coded

    # depth quantization nudges a decoded voxel off its true position; when
    # that moves it to a different pixel in any member view it would splat
    # wrong content there, so such voxels are evicted to the exact-position
    # overflow list and the atlas is re-coded without them.
    while True:
        planes, depth_code, coded = build_planes(occupancy)
        ys, xs = np.nonzero(occupancy)
        if ys.size == 0:
            break
        zhat = _decode_plane(depth_code, coded)[ys, xs] / DEPTH_SCALE
        cam = np.stack(
            [(xs - intr.cx) * zhat / intr.focal, (ys - intr.cy) * zhat / intr.focal, zhat],
            axis=1,
        )
        world_hat = cam @ rot_a.T + t_a
        true_pos = scene.positions[vid_map[ys, xs]]
        unstable = np.zeros(ys.size, dtype=bool)
        for m in seg.members:
            pose = cache.domain.pose(m)
            rm = pose.rotation()
            tm = pose.translation()
            pt, _ = project_points(true_pos, rm, tm, intr.focal, intr.cx, intr.cy, w, h)
            pd, _ = project_points(world_hat, rm, tm, intr.focal, intr.cx, intr.cy, w, h)
            unstable |= pt != pd
        if not unstable.any():
            break
        occupancy[ys[unstable], xs[unstable]] = False
        vid_map[ys[unstable], xs[unstable]] = EMPTY

    over = np.setdiff1d(phi, vid_map[occupancy])
    overflow_pos = scene.positions[over].astype(np.float32).astype(np.float64)
    overflow_color = scene.colors[over].copy()
    n_blocks = int(coded.size)
    n_coded = int(coded.sum())
    bits = (
        n_blocks  # which blocks are coded
        + n_coded * BLOCK * BLOCK  # per-block presence bitmap
        + sum(p.bits for p in planes)
        + depth_code.bits
        + OVERFLOW_RECORD_BITS * int(over.size)
    )
    return EncodedAux(
        members=seg.members,
        reference=seg.reference,
        atlas_view=int(atlas_view),
        pose=cache.domain.pose(atlas_view),
        intrinsics=intr,
        q=float(q),
        occupancy=occupancy,
        coded_blocks=coded,
        color=planes,
        depth=depth_code,
        vid_map=vid_map,
        overflow_ids=over.astype(np.int64),
        overflow_pos=overflow_pos,
        overflow_color=overflow_color,
        phi_size=int(phi.size),
        bits=bits,
    )


def decode_aux(enc: EncodedAux) -> AuxVoxels:
    """Recover the innovation voxels from the atlas and overflow records.

    Atlas pixels are back-projected through their decoded depth, so the
    decoder uses only coded data (plus the id sideband for auditing).
    """
    if enc.empty:
        return AuxVoxels(
            ids=np.empty(0, dtype=np.int64),
            positions=np.empty((0, 3), dtype=np.float64),
            colors=np.empty((0, 3), dtype=np.uint8),
        )
    intr = enc.intrinsics
    color = np.stack([_decode_plane(p, enc.coded_blocks) for p in enc.color], axis=2)
    color = np.clip(np.rint(color), 0, 255).astype(np.uint8)
    depth = _decode_plane(enc.depth, enc.coded_blocks) / DEPTH_SCALE
    occ = enc.occupancy
    ys, xs = np.nonzero(occ)
    z = depth[ys, xs]
    xc = (xs - intr.cx) * z / intr.focal
    yc = (ys - intr.cy) * z / intr.focal
    cam = np.stack([xc, yc, z], axis=1)
    r = enc.pose.rotation()
    world = cam @ r.T + enc.pose.translation()
    ids = enc.vid_map[ys, xs].astype(np.int64)
    cols = color[ys, xs]
    return AuxVoxels(
        ids=np.concatenate([ids, enc.overflow_ids]),
        positions=np.concatenate([world, enc.overflow_pos]),
        colors=np.concatenate([cols, enc.overflow_color]).astype(np.uint8),
    )


@dataclass(frozen=True)
class SizeModelFit:
    """Least-squares line through (innovation size, coded bits) points."""

    slope: float
    intercept: float
    r: float
    n_points: int
    degenerate: bool

    def predict(self, phi_size: float) -> float:
        return self.slope * phi_size + self.intercept


def fit_size_model(points) -> SizeModelFit:
    """Fit bits as a linear function of innovation-set size.

    Two points give an exact fit flagged degenerate; inputs whose sizes
    are all equal are rejected.
    """
    pts = [(float(a), float(b)) for a, b in points]
    if len(pts) < 2:
        raise ValueError("need at least two (size, bits) points")
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if np.ptp(x) == 0:
        raise ValueError("innovation sizes are all equal; no line to fit")
    slope, intercept = np.polyfit(x, y, 1)
    if np.ptp(y) == 0:
        r = 1.0  # flat line is an exact fit
    else:
        r = float(np.corrcoef(x, y)[0, 1])
    return SizeModelFit(
        slope=float(slope),
        intercept=float(intercept),
        r=r,
        n_points=len(pts),
        degenerate=len(pts) == 2,
    )


# --- container serialization ---------------------------------------------

_DTYPES = {"i8": np.int64, "u1": np.uint8, "f8": np.float64, "f4": np.float32, "b1": np.bool_}


def _write_array(buf: io.BytesIO, arr: np.ndarray) -> None:
    code = arr.dtype.str[1:]
    if code not in _DTYPES:
        raise ValueError(f"unsupported dtype {arr.dtype}")
    buf.write(struct.pack("<2sB", code.encode(), arr.ndim))
    buf.write(struct.pack(f"<{arr.ndim}i", *arr.shape))
    buf.write(np.ascontiguousarray(arr).tobytes())


def _read_array(buf: io.BytesIO) -> np.ndarray:
    code, ndim = struct.unpack("<2sB", buf.read(3))
    shape = struct.unpack(f"<{ndim}i", buf.read(4 * ndim))
    dtype = _DTYPES[code.decode()]
    n = int(np.prod(shape)) if shape else 1
    data = buf.read(n * np.dtype(dtype).itemsize)
    return np.frombuffer(data, dtype=dtype).reshape(shape).copy()


def _write_plane(buf: io.BytesIO, code: PlaneCode) -> None:
    buf.write(
        struct.pack(
            "<diiiiQB",
            code.step,
            code.nby,
            code.nbx,
            code.height,
            code.width,
            code.bits,
            int(code.padded),
        )
    )
    _write_array(buf, code.symbols)


def _read_plane(buf: io.BytesIO) -> PlaneCode:
    step, nby, nbx, h, w, bits, padded = struct.unpack("<diiiiQB", buf.read(33))
    return PlaneCode(_read_array(buf), step, nby, nbx, h, w, int(bits), bool(padded))


_HEADER_FMT = "<4sBBdi6dHHddQ"
_HEADER_SIZE = struct.calcsize(_HEADER_FMT)


def _pack_header(kind: int, q: float, view: int, pose, intr: CameraIntrinsics, bits: int) -> bytes:
    p = pose.as_vector() if pose is not None else np.zeros(6)
    return struct.pack(
        _HEADER_FMT,
        MAGIC,
        VERSION,
        kind,
        q,
        view,
        *p,
        intr.width,
        intr.height,
        intr.focal,
        intr.cx,
        bits,
    )


def reference_to_bytes(enc: EncodedReference) -> bytes:
    buf = io.BytesIO()
    buf.write(_pack_header(0, enc.q, enc.view_index, enc.pose, enc.intrinsics, enc.bits))
    buf.write(struct.pack("<dB", enc.intrinsics.cy, 1 if enc.mask is not None else 0))
    for p in enc.color:
        _write_plane(buf, p)
    _write_plane(buf, enc.depth)
    if enc.mask is not None:
        _write_array(buf, enc.mask)
    _write_array(buf, enc.vid_map)
    return buf.getvalue()


def reference_from_bytes(data: bytes) -> EncodedReference:
    buf = io.BytesIO(data)
    magic, version, kind, q, view, *rest = struct.unpack(_HEADER_FMT, buf.read(_HEADER_SIZE))
    if magic != MAGIC or version != VERSION or kind != 0:
        raise ValueError("not a reference container")
    pose = CameraPose(*rest[0:6])
    width, height, focal, cx, bits = rest[6], rest[7], rest[8], rest[9], rest[10]
    cy, has_mask = struct.unpack("<dB", buf.read(9))
    intr = CameraIntrinsics(focal, width, height, cx, cy)
    color = tuple(_read_plane(buf) for _ in range(3))
    depth = _read_plane(buf)
    mask = _read_array(buf) if has_mask else None
    vid_map = _read_array(buf)
    return EncodedReference(view, pose, intr, q, color, depth, mask, vid_map, int(bits))


def aux_to_bytes(enc: EncodedAux) -> bytes:
    buf = io.BytesIO()
    buf.write(_pack_header(1, enc.q, enc.atlas_view, enc.pose, enc.intrinsics, enc.bits))
    buf.write(struct.pack("<di", enc.intrinsics.cy, enc.reference))
    buf.write(struct.pack("<ii", len(enc.members), enc.phi_size))
    buf.write(struct.pack(f"<{len(enc.members)}i", *enc.members))
    _write_array(buf, enc.overflow_ids)
    _write_array(buf, enc.overflow_pos.astype(np.float32))
    _write_array(buf, enc.overflow_color)
    if not enc.empty:
        _write_array(buf, enc.occupancy)
        _write_array(buf, enc.coded_blocks)
        for p in enc.color:
            _write_plane(buf, p)
        _write_plane(buf, enc.depth)
        _write_array(buf, enc.vid_map)
    return buf.getvalue()


def aux_from_bytes(data: bytes) -> EncodedAux:
    buf = io.BytesIO(data)
    magic, version, kind, q, atlas_view, *rest = struct.unpack(_HEADER_FMT, buf.read(_HEADER_SIZE))
    if magic != MAGIC or version != VERSION or kind != 1:
        raise ValueError("not an aux container")
    pose = CameraPose(*rest[0:6])
    width, height, focal, cx, bits = rest[6], rest[7], rest[8], rest[9], rest[10]
    cy, reference = struct.unpack("<di", buf.read(12))
    intr = CameraIntrinsics(focal, width, height, cx, cy)
    n_members, phi_size = struct.unpack("<ii", buf.read(8))
    members = struct.unpack(f"<{n_members}i", buf.read(4 * n_members))
    overflow_ids = _read_array(buf)
    overflow_pos = _read_array(buf).astype(np.float64)
    overflow_color = _read_array(buf)
    if phi_size == 0:
        occupancy = coded = color = depth = vid_map = None
    else:
        occupancy = _read_array(buf)
        coded = _read_array(buf)
        color = tuple(_read_plane(buf) for _ in range(3))
        depth = _read_plane(buf)
        vid_map = _read_array(buf)
    return EncodedAux(
        members=tuple(members),
        reference=reference,
        atlas_view=atlas_view,
        pose=None if phi_size == 0 else pose,
        intrinsics=intr,
        q=q,
        occupancy=occupancy,
        coded_blocks=coded,
        color=color,
        depth=depth,
        vid_map=vid_map,
        overflow_ids=overflow_ids,
        overflow_pos=overflow_pos,
        overflow_color=overflow_color,
        phi_size=phi_size,
        bits=int(bits),
    )
