# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled projection and z-buffer kernels.

Arithmetic must stay in the exact order used by kernels/_py.py; the two
backends are asserted bit-identical in the test suite. Do not enable
-ffast-math or FMA contraction.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


def project_points(points, r, t, double focal, double cx, double cy,
                   int width, int height):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] rm = np.ascontiguousarray(r, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] pix = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] depth = np.empty(n, dtype=np.float64)
    cdef double r00 = rm[0, 0], r01 = rm[0, 1], r02 = rm[0, 2]
    cdef double r10 = rm[1, 0], r11 = rm[1, 1], r12 = rm[1, 2]
    cdef double r20 = rm[2, 0], r21 = rm[2, 1], r22 = rm[2, 2]
    cdef double tx = tv[0], ty = tv[1], tz = tv[2]
    cdef double dx, dy, dz, xc, yc, zc, u, v, px, py
    cdef Py_ssize_t i
    for i in range(n):
        dx = pts[i, 0] - tx
        dy = pts[i, 1] - ty
        dz = pts[i, 2] - tz
        xc = r00 * dx + r10 * dy + r20 * dz
        yc = r01 * dx + r11 * dy + r21 * dz
        zc = r02 * dx + r12 * dy + r22 * dz
        depth[i] = zc
        if zc > 0.0:
            u = focal * xc / zc + cx
            v = focal * yc / zc + cy
            px = floor(u + 0.5)
            py = floor(v + 0.5)
            if 0 <= px < width and 0 <= py < height:
                pix[i] = <cnp.int64_t>(py * width + px)
            else:
                pix[i] = -1
        else:
            pix[i] = -1
    return pix, depth


def zbuffer_select(pix, depth, Py_ssize_t n_pixels):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] p = np.ascontiguousarray(pix, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d = np.ascontiguousarray(depth, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] winner = np.full(n_pixels, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wdepth = np.full(n_pixels, np.inf, dtype=np.float64)
    cdef Py_ssize_t i
    cdef cnp.int64_t q
    for i in range(n):
        q = p[i]
        if q >= 0 and d[i] < wdepth[q]:
            winner[q] = i
            wdepth[q] = d[i]
    return winner, wdepth


def clamped_walk(drow, dcol, cnp.int64_t start_row, cnp.int64_t start_col,
                 cnp.int64_t rows, cnp.int64_t cols):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] dr = np.ascontiguousarray(drow, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] dc = np.ascontiguousarray(dcol, dtype=np.int64)
    cdef Py_ssize_t n = dr.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t r = start_row, c = start_col, nr, nc
    cdef Py_ssize_t k
    for k in range(n):
        nr = r + dr[k]
        nc = c + dc[k]
        if 0 <= nr < rows:
            r = nr
        if 0 <= nc < cols:
            c = nc
        out[k] = r * cols + c
    return out
