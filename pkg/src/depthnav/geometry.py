"""Small 2D geometry helpers shared across the package.

Points are plain ``(x, y)`` float tuples on the hot paths; numpy arrays are
used only where batching pays off.
"""

from __future__ import annotations

import math
from typing import Optional, Tuple

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.fmod(a, TWO_PI)
    if a > math.pi:
        a -= TWO_PI
    elif a <= -math.pi:
        a += TWO_PI
    return a


def rotate(x: float, y: float, angle: float) -> Tuple[float, float]:
    """Rotate the vector (x, y) counterclockwise by ``angle``."""
    c, s = math.cos(angle), math.sin(angle)
    return c * x - s * y, s * x + c * y


def unit(x: float, y: float) -> Tuple[float, float]:
    n = math.hypot(x, y)
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return x / n, y / n


def cross(ax: float, ay: float, bx: float, by: float) -> float:
    return ax * by - ay * bx


def dot(ax: float, ay: float, bx: float, by: float) -> float:
    return ax * bx + ay * by


def angle_between(ax: float, ay: float, bx: float, by: float) -> float:
    """Unsigned angle between two vectors, in [0, pi]."""
    d = dot(ax, ay, bx, by)
    c = cross(ax, ay, bx, by)
    return abs(math.atan2(c, d))


def saturate(value: float, bound: float) -> float:
    """Clamp ``value`` to [-bound, +bound]."""
    if value > bound:
        return bound
    if value < -bound:
        return -bound
    return value


def sgn_bl(s: float, width: float) -> float:
    """Sign function with a linear boundary layer of half-width ``width``.

    Returns clamp(s / width, -1, 1).  The boundary layer stands in for the
    convexified (Filippov) solution of a discontinuous feedback law and
    suppresses chattering in fixed-step integration.
    """
    v = s / width
    if v > 1.0:
        return 1.0
    if v < -1.0:
        return -1.0
    return v


def point_segment_distance(px: float, py: float,
                           ax: float, ay: float,
                           bx: float, by: float) -> float:
    """Exact distance from point p to segment [a, b]."""
    ex, ey = bx - ax, by - ay
    L2 = ex * ex + ey * ey
    if L2 == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * ex + (py - ay) * ey) / L2
    t = max(0.0, min(1.0, t))
    return math.hypot(px - ax - t * ex, py - ay - t * ey)


def ray_circle_intersection(ox: float, oy: float,
                            dx: float, dy: float,
                            cx: float, cy: float,
                            radius: float) -> Optional[float]:
    """First positive ray parameter where o + t*d meets the circle, else None.

    Analytic oracle used by tests against the polyline ray caster; ``d`` must
    be a unit vector.
    """
    fx, fy = ox - cx, oy - cy
    b = fx * dx + fy * dy
    c = fx * fx + fy * fy - radius * radius
    disc = b * b - c
    if disc < 0.0:
        return None
    root = math.sqrt(disc)
    t = -b - root
    if t > 1e-12:
        return t
    t = -b + root
    if t > 1e-12:
        return t
    return None


def line_circle_crossings(px: float, py: float, hx: float, hy: float,
                          cx: float, cy: float, r: float):
    """Parameters t where p + t*h meets the circle (h unit). Empty if none."""
    fx, fy = px - cx, py - cy
    b = fx * hx + fy * hy
    c = fx * fx + fy * fy - r * r
    disc = b * b - c
    if disc < 0.0:
        return []
    root = math.sqrt(disc)
    return [-b - root, -b + root]
