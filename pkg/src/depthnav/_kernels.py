"""Numba kernels for the geometry hot paths (ray casting, clearance)."""

from __future__ import annotations

import numba
import numpy as np

_SIG_CACHE = {"cache": True, "nogil": True}


@numba.njit(**_SIG_CACHE)
def ray_cast(ox, oy, dx, dy, max_range, ax, ay, bx, by):  # pragma: no cover
    """Nearest hit of ray o + t*d against segments [a_i, b_i].

    Returns (t, index, frac) with frac the position along the hit segment,
    or (inf, -1, 0.0) when nothing is hit within max_range.
    """
    best_t = np.inf
    best_i = -1
    best_frac = 0.0
    n = ax.shape[0]
    for i in range(n):
        ex = bx[i] - ax[i]
        ey = by[i] - ay[i]
        denom = dx * ey - dy * ex
        if denom == 0.0:
            continue
        rx = ax[i] - ox
        ry = ay[i] - oy
        t = (rx * ey - ry * ex) / denom
        if t <= 1e-12 or t > max_range or t >= best_t:
            continue
        s = (rx * dy - ry * dx) / denom
        if s < 0.0 or s > 1.0:
            continue
        best_t = t
        best_i = i
        best_frac = s
    return best_t, best_i, best_frac


@numba.njit(**_SIG_CACHE)
def min_point_distance(px, py, ax, ay, bx, by):  # pragma: no cover
    """Minimum distance from point p to a set of segments; (dist, index)."""
    best = np.inf
    best_i = -1
    n = ax.shape[0]
    for i in range(n):
        ex = bx[i] - ax[i]
        ey = by[i] - ay[i]
        L2 = ex * ex + ey * ey
        if L2 > 0.0:
            t = ((px - ax[i]) * ex + (py - ay[i]) * ey) / L2
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
        else:
            t = 0.0
        wx = px - ax[i] - t * ex
        wy = py - ay[i] - t * ey
        d2 = wx * wx + wy * wy
        if d2 < best:
            best = d2
            best_i = i
    return np.sqrt(best), best_i


@numba.njit(**_SIG_CACHE)
def min_segment_set_distance(ax1, ay1, bx1, by1, ax2, ay2, bx2, by2):  # pragma: no cover
    """Minimum distance between two segment sets (0.0 if they intersect)."""
    best = np.inf
    for i in range(ax1.shape[0]):
        p1x, p1y, q1x, q1y = ax1[i], ay1[i], bx1[i], by1[i]
        for j in range(ax2.shape[0]):
            p2x, p2y, q2x, q2y = ax2[j], ay2[j], bx2[j], by2[j]
            d1x, d1y = q1x - p1x, q1y - p1y
            d2x, d2y = q2x - p2x, q2y - p2y
            denom = d1x * d2y - d1y * d2x
            if denom != 0.0:
                rx, ry = p2x - p1x, p2y - p1y
                t = (rx * d2y - ry * d2x) / denom
                s = (rx * d1y - ry * d1x) / denom
                if 0.0 <= t <= 1.0 and 0.0 <= s <= 1.0:
                    return 0.0
            for (px, py, cx, cy, dxx, dyy) in (
                (p1x, p1y, p2x, p2y, d2x, d2y),
                (q1x, q1y, p2x, p2y, d2x, d2y),
                (p2x, p2y, p1x, p1y, d1x, d1y),
                (q2x, q2y, p1x, p1y, d1x, d1y),
            ):
                L2 = dxx * dxx + dyy * dyy
                if L2 > 0.0:
                    u = ((px - cx) * dxx + (py - cy) * dyy) / L2
                    if u < 0.0:
                        u = 0.0
                    elif u > 1.0:
                        u = 1.0
                else:
                    u = 0.0
                wx = px - cx - u * dxx
                wy = py - cy - u * dyy
                d2 = wx * wx + wy * wy
                if d2 < best:
                    best = d2
    return np.sqrt(best)


@numba.njit(**_SIG_CACHE)
def polyline_self_intersects(x, y, closed):  # pragma: no cover
    """True if the polyline crosses itself (adjacent segments excluded)."""
    n = x.shape[0] - 1
    for i in range(n):
        for j in range(i + 2, n):
            if closed and i == 0 and j == n - 1:
                continue
            p1x, p1y = x[i], y[i]
            d1x, d1y = x[i + 1] - p1x, y[i + 1] - p1y
            p2x, p2y = x[j], y[j]
            d2x, d2y = x[j + 1] - p2x, y[j + 1] - p2y
            denom = d1x * d2y - d1y * d2x
            if denom == 0.0:
                continue
            rx, ry = p2x - p1x, p2y - p1y
            t = (rx * d2y - ry * d2x) / denom
            s = (rx * d1y - ry * d1x) / denom
            if 1e-12 < t < 1.0 - 1e-12 and 1e-12 < s < 1.0 - 1e-12:
                return True
    return False
