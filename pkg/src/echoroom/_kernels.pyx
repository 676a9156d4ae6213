# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: peak picking and the common-image-source search.

Must stay bit-identical in results to the NumPy fallback in
``_kernels_py.py`` (same expression trees, same tie-breaks); the extension is
built with -ffp-contract=off to keep C arithmetic from fusing into FMA.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

MAX_CANDIDATES = 65536


def pick_peaks(mag, double threshold, Py_ssize_t min_sep, Py_ssize_t max_peaks):
    """See ``_kernels_py.pick_peaks``; identical contract."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] m = np.ascontiguousarray(mag, dtype=np.float64)
    cdef Py_ssize_t n = m.shape[0]
    if n < 3:
        return np.empty(0, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cand_buf = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t ncand = 0
    cdef Py_ssize_t i
    cdef double v
    for i in range(1, n - 1):
        v = m[i]
        if v >= threshold and v > m[i - 1] and v >= m[i + 1]:
            cand_buf[ncand] = i
            ncand += 1
    if ncand == 0:
        return np.empty(0, dtype=np.int64)
    cand = cand_buf[:ncand]
    order = np.lexsort((cand, -m[cand]))
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order_arr = np.ascontiguousarray(order, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cand_arr = np.ascontiguousarray(cand, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] accepted = np.empty(max_peaks, dtype=np.int64)
    cdef Py_ssize_t nacc = 0, oi, j
    cdef cnp.int64_t c
    cdef bint ok
    for oi in range(order_arr.shape[0]):
        c = cand_arr[order_arr[oi]]
        ok = True
        for j in range(nacc):
            if c - accepted[j] < min_sep and accepted[j] - c < min_sep:
                ok = False
                break
        if ok:
            accepted[nacc] = c
            nacc += 1
            if nacc >= max_peaks:
                break
    out = accepted[:nacc].copy()
    out.sort()
    return out


def common_is_search(
    mic_xy,
    dists,
    double match_radius,
    double det_eps,
    double source_x,
    double source_y,
    double source_eps,
):
    """See ``_kernels_py.common_is_search``; identical contract."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] mic = np.ascontiguousarray(mic_xy, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d0 = np.ascontiguousarray(dists[0], dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d1 = np.ascontiguousarray(dists[1], dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d2 = np.ascontiguousarray(dists[2], dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] d3 = np.ascontiguousarray(dists[3], dtype=np.float64)

    empty = (
        np.empty((0, 2), dtype=np.float64),
        np.empty(0, dtype=np.float64),
        np.empty((0, 4), dtype=np.int64),
    )
    cdef Py_ssize_t n0 = d0.shape[0], n1 = d1.shape[0], n2 = d2.shape[0], n3 = d3.shape[0]
    if n0 == 0 or n1 == 0 or n2 == 0 or n3 == 0:
        return empty

    cdef double m0x = mic[0, 0], m0y = mic[0, 1]
    cdef double m1x = mic[1, 0], m1y = mic[1, 1]
    cdef double m2x = mic[2, 0], m2y = mic[2, 1]
    cdef double m3x = mic[3, 0], m3y = mic[3, 1]

    # Triples (0,1,2), (1,2,3), (2,3,0); matrices are distance-independent.
    cdef double t1a11 = m0x - m1x, t1a12 = m0y - m1y, t1a21 = m1x - m2x, t1a22 = m1y - m2y
    cdef double t2a11 = m1x - m2x, t2a12 = m1y - m2y, t2a21 = m2x - m3x, t2a22 = m2y - m3y
    cdef double t3a11 = m2x - m3x, t3a12 = m2y - m3y, t3a21 = m3x - m0x, t3a22 = m3y - m0y
    cdef double det1 = t1a11 * t1a22 - t1a12 * t1a21
    cdef double det2 = t2a11 * t2a22 - t2a12 * t2a21
    cdef double det3 = t3a11 * t3a22 - t3a12 * t3a21
    if fabs(det1) <= det_eps or fabs(det2) <= det_eps or fabs(det3) <= det_eps:
        return empty

    cdef Py_ssize_t cap = MAX_CANDIDATES
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_pos = np.empty((cap, 2), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_res = np.empty(cap, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] out_idx = np.empty((cap, 4), dtype=np.int64)
    cdef Py_ssize_t nout = 0

    cdef double r2 = match_radius * match_radius
    cdef double se2 = source_eps * source_eps
    cdef Py_ssize_t i0, i1, i2, i3
    cdef double da, db, dc, dd
    cdef double b1, b2, p1x, p1y, p2x, p2y, p3x, p3y
    cdef double e12, e13, e23, cx, cy, nx, ny, mpx, mpy, worst

    for i0 in range(n0):
        da = d0[i0]
        for i1 in range(n1):
            db = d1[i1]
            for i2 in range(n2):
                dc = d2[i2]
                # Triple 1: mics 0,1,2.
                b1 = 0.5 * (m0x * m0x - m1x * m1x + m0y * m0y - m1y * m1y - da * da + db * db)
                b2 = 0.5 * (m1x * m1x - m2x * m2x + m1y * m1y - m2y * m2y - db * db + dc * dc)
                p1x = (b1 * t1a22 - t1a12 * b2) / det1
                p1y = (t1a11 * b2 - b1 * t1a21) / det1
                for i3 in range(n3):
                    dd = d3[i3]
                    # Triple 2: mics 1,2,3.
                    b1 = 0.5 * (m1x * m1x - m2x * m2x + m1y * m1y - m2y * m2y - db * db + dc * dc)
                    b2 = 0.5 * (m2x * m2x - m3x * m3x + m2y * m2y - m3y * m3y - dc * dc + dd * dd)
                    p2x = (b1 * t2a22 - t2a12 * b2) / det2
                    p2y = (t2a11 * b2 - b1 * t2a21) / det2
                    e12 = (p1x - p2x) * (p1x - p2x) + (p1y - p2y) * (p1y - p2y)
                    if not e12 <= r2:
                        continue
                    # Triple 3: mics 2,3,0.
                    b1 = 0.5 * (m2x * m2x - m3x * m3x + m2y * m2y - m3y * m3y - dc * dc + dd * dd)
                    b2 = 0.5 * (m3x * m3x - m0x * m0x + m3y * m3y - m0y * m0y - dd * dd + da * da)
                    p3x = (b1 * t3a22 - t3a12 * b2) / det3
                    p3y = (t3a11 * b2 - b1 * t3a21) / det3
                    e13 = (p1x - p3x) * (p1x - p3x) + (p1y - p3y) * (p1y - p3y)
                    if not e13 <= r2:
                        continue
                    e23 = (p2x - p3x) * (p2x - p3x) + (p2y - p3y) * (p2y - p3y)
                    if not e23 <= r2:
                        continue
                    cx = (p1x + p2x + p3x) / 3.0
                    cy = (p1y + p2y + p3y) / 3.0
                    nx = cx - source_x
                    ny = cy - source_y
                    if not nx * nx + ny * ny >= se2:
                        continue
                    mpx = 0.5 * (source_x + cx)
                    mpy = 0.5 * (source_y + cy)
                    if not nx * (m0x - mpx) + ny * (m0y - mpy) < 0.0:
                        continue
                    if not nx * (m1x - mpx) + ny * (m1y - mpy) < 0.0:
                        continue
                    if not nx * (m2x - mpx) + ny * (m2y - mpy) < 0.0:
                        continue
                    if not nx * (m3x - mpx) + ny * (m3y - mpy) < 0.0:
                        continue
                    if nout >= cap:
                        raise RuntimeError("common-IS candidate overflow")
                    worst = e12
                    if e13 > worst:
                        worst = e13
                    if e23 > worst:
                        worst = e23
                    out_pos[nout, 0] = cx
                    out_pos[nout, 1] = cy
                    out_res[nout] = sqrt(worst)
                    out_idx[nout, 0] = i0
                    out_idx[nout, 1] = i1
                    out_idx[nout, 2] = i2
                    out_idx[nout, 3] = i3
                    nout += 1

    return (
        out_pos[:nout].copy(),
        out_res[:nout].copy(),
        out_idx[:nout].copy(),
    )
