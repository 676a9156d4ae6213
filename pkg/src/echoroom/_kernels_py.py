"""Pure-NumPy fallback for the hot kernels.

Semantics (including float operation order and all tie-breaks) are kept
bit-identical to the compiled extension in ``_kernels.pyx``; the test suite
asserts equality on random inputs. Keep the two files in sync.
"""

from __future__ import annotations

import numpy as np

MAX_CANDIDATES = 65536


def pick_peaks(mag: np.ndarray, threshold: float, min_sep: int, max_peaks: int) -> np.ndarray:
    """Indices of the largest local maxima of ``mag`` above ``threshold``.

    A local maximum satisfies mag[i] > mag[i-1] and mag[i] >= mag[i+1]
    (leftmost sample of a plateau wins; endpoints are never peaks). Peaks are
    admitted largest-amplitude first subject to a minimum index separation,
    truncated to ``max_peaks``, and returned in ascending index order.
    """
    mag = np.ascontiguousarray(mag, dtype=np.float64)
    n = mag.shape[0]
    if n < 3:
        return np.empty(0, dtype=np.int64)
    mid, left, right = mag[1:-1], mag[:-2], mag[2:]
    cand = 1 + np.flatnonzero((mid >= threshold) & (mid > left) & (mid >= right))
    if cand.size == 0:
        return np.empty(0, dtype=np.int64)
    order = np.lexsort((cand, -mag[cand]))
    accepted: list[int] = []
    for oi in order:
        i = int(cand[oi])
        if all(abs(i - j) >= min_sep for j in accepted):
            accepted.append(i)
            if len(accepted) >= max_peaks:
                break
    accepted.sort()
    return np.asarray(accepted, dtype=np.int64)


def common_is_search(
    mic_xy: np.ndarray,
    dists: list[np.ndarray],
    match_radius: float,
    det_eps: float,
    source_x: float,
    source_y: float,
    source_eps: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exhaustive common-image-source search over echo-distance combinations.

    For every combination of one echo distance per microphone, solve the
    three overlapping mic-triple systems (1-2-3, 2-3-4, 3-4-1); keep the
    combination when the three solutions agree within ``match_radius`` and
    the implied reflection geometry is plausible (every mic strictly on the
    source side of the candidate's bisector wall).

    Returns (positions[n,2], residuals[n], echo_indices[n,4]) in combination
    iteration order (ascending nested echo indices).
    """
    mic = np.ascontiguousarray(mic_xy, dtype=np.float64)
    d0, d1, d2, d3 = (np.ascontiguousarray(d, dtype=np.float64) for d in dists)
    empty = (
        np.empty((0, 2), dtype=np.float64),
        np.empty(0, dtype=np.float64),
        np.empty((0, 4), dtype=np.int64),
    )
    if min(d.size for d in (d0, d1, d2, d3)) == 0:
        return empty

    mx, my = mic[:, 0], mic[:, 1]
    triples = ((0, 1, 2), (1, 2, 3), (2, 3, 0))
    dets = []
    for a, b, c in triples:
        a11 = mx[a] - mx[b]
        a12 = my[a] - my[b]
        a21 = mx[b] - mx[c]
        a22 = my[b] - my[c]
        dets.append(a11 * a22 - a12 * a21)
    if any(abs(det) <= det_eps for det in dets):
        return empty

    grids = np.indices((d0.size, d1.size, d2.size, d3.size))
    i0, i1, i2, i3 = (g.ravel() for g in grids)
    dd = (d0[i0], d1[i1], d2[i2], d3[i3])

    def solve(tri_idx: int):
        a, b, c = triples[tri_idx]
        da, db, dc = dd[a], dd[b], dd[c]
        a11 = mx[a] - mx[b]
        a12 = my[a] - my[b]
        a21 = mx[b] - mx[c]
        a22 = my[b] - my[c]
        det = dets[tri_idx]
        b1 = 0.5 * (mx[a] * mx[a] - mx[b] * mx[b] + my[a] * my[a] - my[b] * my[b] - da * da + db * db)
        b2 = 0.5 * (mx[b] * mx[b] - mx[c] * mx[c] + my[b] * my[b] - my[c] * my[c] - db * db + dc * dc)
        px = (b1 * a22 - a12 * b2) / det
        py = (a11 * b2 - b1 * a21) / det
        return px, py

    p1x, p1y = solve(0)
    p2x, p2y = solve(1)
    p3x, p3y = solve(2)

    r2 = match_radius * match_radius
    d12 = (p1x - p2x) * (p1x - p2x) + (p1y - p2y) * (p1y - p2y)
    d13 = (p1x - p3x) * (p1x - p3x) + (p1y - p3y) * (p1y - p3y)
    d23 = (p2x - p3x) * (p2x - p3x) + (p2y - p3y) * (p2y - p3y)
    ok = (d12 <= r2) & (d13 <= r2) & (d23 <= r2)

    cx = (p1x + p2x + p3x) / 3.0
    cy = (p1y + p2y + p3y) / 3.0

    nx = cx - source_x
    ny = cy - source_y
    ok &= nx * nx + ny * ny >= source_eps * source_eps
    mpx = 0.5 * (source_x + cx)
    mpy = 0.5 * (source_y + cy)
    for k in range(4):
        ok &= nx * (mx[k] - mpx) + ny * (my[k] - mpy) < 0.0

    sel = np.flatnonzero(ok)
    if sel.size > MAX_CANDIDATES:
        raise RuntimeError("common-IS candidate overflow")
    res = np.sqrt(np.maximum(np.maximum(d12[sel], d13[sel]), d23[sel]))
    pos = np.column_stack((cx[sel], cy[sel]))
    idx = np.column_stack((i0[sel], i1[sel], i2[sel], i3[sel])).astype(np.int64)
    return np.ascontiguousarray(pos), res, np.ascontiguousarray(idx)
