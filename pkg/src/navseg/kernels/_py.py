"""NumPy implementations of the projection and z-buffer kernels.

Expression order must match _ext.pyx exactly: both backends evaluate the same
IEEE-754 operations in the same order so their outputs are bit-identical.
"""

import numpy as np


def project_points(points, r, t, focal, cx, cy, width, height):
    """Project world points into a pinhole camera.

    points: (N, 3) float64 world positions; r: camera-to-world rotation;
    t: camera translation. Returns (pix, depth): pix is the flat pixel index
    py*width+px, or -1 when the point is behind the camera or out of frame;
    depth is the camera-frame z (meaningful only where pix >= 0).
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    dx = points[:, 0] - t[0]
    dy = points[:, 1] - t[1]
    dz = points[:, 2] - t[2]
    # world-to-camera is r transposed; keep the a*b + c*d + e*f order
    xc = r[0, 0] * dx + r[1, 0] * dy + r[2, 0] * dz
    yc = r[0, 1] * dx + r[1, 1] * dy + r[2, 1] * dz
    zc = r[0, 2] * dx + r[1, 2] * dy + r[2, 2] * dz
    with np.errstate(divide="ignore", invalid="ignore"):
        u = focal * xc / zc + cx
        v = focal * yc / zc + cy
        px = np.floor(u + 0.5)
        py = np.floor(v + 0.5)
        ok = (zc > 0.0) & (px >= 0) & (px < width) & (py >= 0) & (py < height)
        # NaNs from zc == 0 compare false in `ok`, so the cast below is safe
        pix = np.where(ok, (py * width + px), -1.0).astype(np.int64)
    return pix, zc


def zbuffer_select(pix, depth, n_pixels):
    """Nearest point per pixel.

    pix: (N,) flat pixel indices (-1 = not projected); depth: (N,) camera z.
    Returns (winner, wdepth) of length n_pixels: winner[p] is the index of the
    nearest point landing on p (ties: lowest index), or -1 for empty pixels.
    """
    pix = np.asarray(pix, dtype=np.int64)
    depth = np.asarray(depth, dtype=np.float64)
    winner = np.full(n_pixels, -1, dtype=np.int64)
    wdepth = np.full(n_pixels, np.inf, dtype=np.float64)
    valid = np.nonzero(pix >= 0)[0]
    if valid.size == 0:
        return winner, wdepth
    vp = pix[valid]
    vd = depth[valid]
    # stable lexsort: per pixel, ascending depth, then ascending input index
    order = np.lexsort((vd, vp))
    sp = vp[order]
    first = np.ones(sp.size, dtype=bool)
    first[1:] = sp[1:] != sp[:-1]
    idx = valid[order[first]]
    winner[sp[first]] = idx
    wdepth[sp[first]] = depth[idx]
    return winner, wdepth


def clamped_walk(drow, dcol, start_row, start_col, rows, cols):
    """Apply per-tick grid moves with sticky boundaries.

    drow/dcol: (N,) int64 per-tick deltas in {-1, 0, 1}. A move that would
    leave the grid keeps the previous position on that axis. Returns the
    flat position (row*cols + col) after each move.
    """
    drow = np.asarray(drow, dtype=np.int64)
    dcol = np.asarray(dcol, dtype=np.int64)
    out = np.empty(drow.shape[0], dtype=np.int64)
    r = int(start_row)
    c = int(start_col)
    for k in range(drow.shape[0]):
        nr = r + drow[k]
        nc = c + dcol[k]
        if 0 <= nr < rows:
            r = nr
        if 0 <= nc < cols:
            c = nc
        out[k] = r * cols + c
    return out
