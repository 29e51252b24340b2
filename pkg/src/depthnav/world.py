"""Obstacle curves, the world container, and geometric queries.

Obstacle boundaries are arc-length-parametrized curves with bounded relative
curvature: the heading of the tangent rotates at rate ``growth_rate * w(s) /
r0`` per parameter unit, with ``|w| <= 1`` so no boundary bends tighter than
radius ``r0``.  Curves are realized as dense polylines built by exact
per-step arc integration; per-vertex tangent headings are stored so that
tangents can be interpolated smoothly inside a segment.

World-level queries (ray casting, nearest boundary distance) run against the
cached polylines through numba kernels; analytic circles are additionally
tagged so tests can compare against closed-form ray intersection.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .geometry import point_segment_distance, unit, wrap_angle

WORLD_SCHEMA_VERSION = 1

# Default polyline accuracy: maximum chord deviation (sagitta) as a fraction
# of r0.  Small against the tracking standoff band half-width 0.03*r0 so
# discretization cannot fake a collision or a band violation.
DEFAULT_RESOLUTION = 1e-3

# Boundary separation required between distinct obstacles, in units of r0.
SEPARATION_FACTOR = 8.0 / 5.0

# Sensor range as a fraction of r0.
SENSOR_RANGE_FACTOR = 4.0 / 5.0


class CurvatureBoundViolated(ValueError):
    """Raised when a curvature profile exceeds |w| = 1 on the sample grid."""


class SelfIntersection(ValueError):
    """Raised when a built boundary polyline crosses itself."""


@dataclass
class ObstacleCurve:
    """One obstacle boundary as a sampled curve.

    Attributes:
        curvature_profile: w(s) on [0, 1], dimensionless relative curvature.
        growth_rate:       tangent speed (curve length per parameter unit).
        r0:                minimum radius of curvature (length).
        start_point:       f(0).
        start_tangent:     unit tangent at s = 0.
        closed:            whether f(1) meets f(0).
        xs, ys:            polyline vertices.
        headings:          tangent heading at each vertex (exact).
        svals:             parameter value at each vertex.
        resolution:        chord-deviation bound used to build the cache.
        curvature_bound_ok: False when the profile exceeded |w| = 1 and the
                           bound check was waived at build time.
        meta:              free-form tags (e.g. analytic circle parameters).
    """

    curvature_profile: Callable[[float], float]
    growth_rate: float
    r0: float
    start_point: Tuple[float, float]
    start_tangent: Tuple[float, float]
    closed: bool
    xs: np.ndarray
    ys: np.ndarray
    headings: np.ndarray
    svals: np.ndarray
    resolution: float
    curvature_bound_ok: bool = True
    meta: Dict = field(default_factory=dict)

    @property
    def n_segments(self) -> int:
        return len(self.xs) - 1

    @property
    def length(self) -> float:
        return self.growth_rate

    def bounding_circle(self) -> Tuple[float, float, float]:
        cx = 0.5 * (self.xs.min() + self.xs.max())
        cy = 0.5 * (self.ys.min() + self.ys.max())
        r = float(np.hypot(self.xs - cx, self.ys - cy).max())
        return float(cx), float(cy), r

    def point_at(self, s: float) -> Tuple[float, float]:
        """Interpolated boundary point at parameter s."""
        x = float(np.interp(s, self.svals, self.xs))
        y = float(np.interp(s, self.svals, self.ys))
        return x, y

    def tangent_angle_at(self, s: float) -> float:
        return float(np.interp(s, self.svals, np.unwrap(self.headings)))


def build_curve(curvature_profile: Callable[[float], float],
                growth_rate: float,
                r0: float,
                start_point: Sequence[float],
                start_tangent: Sequence[float],
                resolution: float = DEFAULT_RESOLUTION,
                closed: Optional[bool] = None,
                enforce_curvature_bound: bool = True,
                meta: Optional[Dict] = None) -> ObstacleCurve:
    """Integrate a curvature profile into a polyline obstacle boundary.

    The heading is advanced exactly per step (theta += growth_rate * w / r0
    * ds) and the position along the corresponding circular arc, so tangent
    speed is exact by construction.  Steps are chosen so the sagitta of each
    replaced arc stays below ``resolution * r0``.

    Raises:
        CurvatureBoundViolated: |w| > 1 somewhere and the bound is enforced.
        SelfIntersection: the resulting polyline crosses itself.
    """
    if resolution <= 0.0:
        raise ValueError("resolution must be positive")
    if growth_rate <= 0.0:
        raise ValueError("growth_rate must be positive")

    # Probe the profile for its curvature scale and the bound check.
    probe = np.linspace(0.0, 1.0, 512)
    wvals = np.array([curvature_profile(float(s)) for s in probe])
    wmax = float(np.abs(wvals).max())
    bound_ok = wmax <= 1.0 + 1e-12
    if enforce_curvature_bound and not bound_ok:
        raise CurvatureBoundViolated(
            f"relative curvature reaches {wmax:.4g} > 1")

    # Sagitta of an arc of length ell and radius R is ~ ell^2 / (8R); keep it
    # under resolution*r0 for the tightest radius present.
    kappa_max = max(wmax, 1e-9) / r0
    max_chord = math.sqrt(8.0 * resolution * r0 / kappa_max)
    max_chord = min(max_chord, 0.5 * r0)
    n_steps = max(8, int(math.ceil(growth_rate / max_chord)))
    ds = 1.0 / n_steps

    tx, ty = unit(float(start_tangent[0]), float(start_tangent[1]))
    theta = math.atan2(ty, tx)
    x, y = float(start_point[0]), float(start_point[1])

    xs = np.empty(n_steps + 1)
    ys = np.empty(n_steps + 1)
    headings = np.empty(n_steps + 1)
    svals = np.linspace(0.0, 1.0, n_steps + 1)
    xs[0], ys[0], headings[0] = x, y, theta

    for k in range(n_steps):
        s_mid = (k + 0.5) * ds
        w = float(curvature_profile(s_mid))
        dtheta = growth_rate * w / r0 * ds
        ell = growth_rate * ds
        if abs(dtheta) < 1e-12:
            x += ell * math.cos(theta)
            y += ell * math.sin(theta)
        else:
            radius = ell / dtheta
            x += radius * (math.sin(theta + dtheta) - math.sin(theta))
            y += radius * (math.cos(theta) - math.cos(theta + dtheta))
        theta += dtheta
        xs[k + 1], ys[k + 1], headings[k + 1] = x, y, theta

    gap = math.hypot(xs[-1] - xs[0], ys[-1] - ys[0])
    close_tol = 2.0 * max_chord
    if closed is None:
        closed = gap <= close_tol
    elif closed and gap > close_tol:
        raise ValueError(
            f"curve declared closed but endpoint misses start by {gap:.3g}")
    if closed:
        xs[-1], ys[-1] = xs[0], ys[0]

    if _kernels.polyline_self_intersects(xs, ys, closed):
        raise SelfIntersection("built boundary polyline crosses itself")

    return ObstacleCurve(
        curvature_profile=curvature_profile,
        growth_rate=growth_rate,
        r0=r0,
        start_point=(float(start_point[0]), float(start_point[1])),
        start_tangent=(tx, ty),
        closed=bool(closed),
        xs=xs, ys=ys, headings=headings, svals=svals,
        resolution=resolution,
        curvature_bound_ok=bound_ok,
        meta=dict(meta or {}),
    )


def circle_obstacle(center: Sequence[float], radius: float, r0: float,
                    resolution: float = DEFAULT_RESOLUTION) -> ObstacleCurve:
    """Closed circular obstacle of the given radius (must be >= r0)."""
    w = r0 / radius
    curve = build_curve(
        lambda s: w,
        growth_rate=2.0 * math.pi * radius,
        r0=r0,
        start_point=(center[0] + radius, center[1]),
        start_tangent=(0.0, 1.0),
        resolution=resolution,
        closed=True,
        meta={"kind": "circle", "center": (float(center[0]), float(center[1])),
              "radius": float(radius)},
    )
    return curve


@dataclass
class AttractionLine:
    """Line through the start point and the target at the origin."""

    anchor: Tuple[float, float]
    direction: Tuple[float, float]  # unit vector pointing at the origin

    @classmethod
    def from_start(cls, start: Sequence[float]) -> "AttractionLine":
        x0, y0 = float(start[0]), float(start[1])
        n = math.hypot(x0, y0)
        if n == 0.0:
            raise ValueError("start point coincides with the target")
        return cls(anchor=(x0, y0), direction=(-x0 / n, -y0 / n))

    @property
    def heading(self) -> float:
        return math.atan2(self.direction[1], self.direction[0])

    def signed_offset(self, x: float, y: float) -> float:
        """Perpendicular offset, positive on the left of the direction."""
        dx, dy = self.direction
        return dx * (y - self.anchor[1]) - dy * (x - self.anchor[0])

    def distance(self, x: float, y: float) -> float:
        return abs(self.signed_offset(x, y))


@dataclass
class RayHit:
    """Result of a ray cast against the world."""

    depth: float
    impact: Tuple[float, float]
    tangent_angle: float  # heading of the boundary tangent at the impact
    obstacle_id: int
    s: float  # curve parameter at the impact


class World:
    """Immutable container of obstacles plus the shared scale constants.

    The target sits at the origin.  ``sensor_range`` is (4/5) * r0.
    """

    def __init__(self, obstacles: Sequence[ObstacleCurve], r0: float,
                 v0: float, agent_start: Optional[Sequence[float]] = None):
        self.obstacles: List[ObstacleCurve] = list(obstacles)
        self.r0 = float(r0)
        self.v0 = float(v0)
        self.sensor_range = SENSOR_RANGE_FACTOR * self.r0
        self.agent_start = (None if agent_start is None
                            else (float(agent_start[0]), float(agent_start[1])))
        self._bounds = [ob.bounding_circle() for ob in self.obstacles]

    def nearby_obstacles(self, x: float, y: float, reach: float) -> List[int]:
        out = []
        for i, (cx, cy, r) in enumerate(self._bounds):
            if math.hypot(x - cx, y - cy) - r <= reach:
                out.append(i)
        return out

    def ray_intersect(self, origin: Sequence[float], direction: Sequence[float],
                      max_range: Optional[float] = None) -> Optional[RayHit]:
        """Nearest boundary hit of a ray within max_range, or None.

        ``direction`` must be unit length.  The returned tangent heading is
        interpolated between the exact per-vertex headings of the hit
        segment.
        """
        if max_range is None:
            max_range = self.sensor_range
        ox, oy = float(origin[0]), float(origin[1])
        dx, dy = float(direction[0]), float(direction[1])
        best: Optional[RayHit] = None
        for i in self.nearby_obstacles(ox, oy, max_range):
            ob = self.obstacles[i]
            t, seg, frac = _kernels.ray_cast(
                ox, oy, dx, dy, max_range,
                ob.xs[:-1], ob.ys[:-1], ob.xs[1:], ob.ys[1:])
            if seg < 0 or not (t < (best.depth if best else max_range)):
                continue
            h0 = float(ob.headings[seg])
            h1 = float(ob.headings[seg + 1])
            tangent = h0 + frac * wrap_angle(h1 - h0)
            s0 = ob.svals[seg]
            s1 = ob.svals[seg + 1]
            best = RayHit(
                depth=float(t),
                impact=(ox + t * dx, oy + t * dy),
                tangent_angle=wrap_angle(float(tangent)),
                obstacle_id=i,
                s=float(s0 + frac * (s1 - s0)),
            )
        return best

    def nearest_boundary_distance(self, point: Sequence[float]) -> Tuple[float, int]:
        """Exact minimum distance from a point to any cached boundary.

        Returns (inf, -1) for an empty world.  Accurate to the polyline
        resolution (the cached chords deviate from the true curve by at most
        ``resolution * r0``).
        """
        px, py = float(point[0]), float(point[1])
        best = math.inf
        best_id = -1
        for i, (cx, cy, r) in enumerate(self._bounds):
            lower = math.hypot(px - cx, py - cy) - r
            if lower >= best:
                continue
            ob = self.obstacles[i]
            d, _ = _kernels.min_point_distance(
                px, py, ob.xs[:-1], ob.ys[:-1], ob.xs[1:], ob.ys[1:])
            if d < best:
                best = float(d)
                best_id = i
        return best, best_id


# ---------------------------------------------------------------------------
# Validation


@dataclass
class PairSeparation:
    i: int
    j: int
    min_separation: float
    hausdorff: float
    ok: bool


@dataclass
class RollingBallResult:
    obstacle: int
    worst_clearance: float  # min over samples of (ball-center distance - r0)
    ok: bool


@dataclass
class ValidationReport:
    """Outcome of the world admissibility checks.

    ``separation_ok`` gates on minimum boundary-to-boundary separation (the
    directed Hausdorff distances are reported alongside because the two only
    agree for similar shapes; separation is the property the guarantees
    need).  ``rolling_ball_ok`` is the sharp-turning condition: a ball of
    radius r0 rolled along the boundary normal must not re-touch the same
    boundary.  ``curvature_ok`` flags profiles that exceeded |w| = 1.
    """

    separations: List[PairSeparation]
    rolling_ball: List[RollingBallResult]
    curvature_ok: bool
    origin_clearance: float
    start_clearance: Optional[float]
    origin_ok: bool
    start_ok: bool

    @property
    def separation_ok(self) -> bool:
        return all(p.ok for p in self.separations)

    @property
    def rolling_ball_ok(self) -> bool:
        return all(r.ok for r in self.rolling_ball)

    @property
    def ok(self) -> bool:
        return (self.separation_ok and self.rolling_ball_ok
                and self.curvature_ok and self.origin_ok and self.start_ok)

    def summary_lines(self) -> List[str]:
        lines = []
        for p in self.separations:
            lines.append(
                f"pair ({p.i},{p.j}): separation {p.min_separation:.4f} "
                f"(hausdorff {p.hausdorff:.4f}) "
                f"{'ok' if p.ok else 'VIOLATES 1.6*r0'}")
        for r in self.rolling_ball:
            lines.append(
                f"obstacle {r.obstacle}: rolling-ball clearance "
                f"{r.worst_clearance:+.4f} {'ok' if r.ok else 'VIOLATED'}")
        lines.append(f"curvature bound: {'ok' if self.curvature_ok else 'VIOLATED'}")
        lines.append(f"target ball clearance {self.origin_clearance:.4f} "
                     f"{'ok' if self.origin_ok else 'OCCUPIED'}")
        if self.start_clearance is not None:
            lines.append(f"start ball clearance {self.start_clearance:.4f} "
                         f"{'ok' if self.start_ok else 'OCCUPIED'}")
        return lines


def _segments(ob: ObstacleCurve):
    return ob.xs[:-1], ob.ys[:-1], ob.xs[1:], ob.ys[1:]


def _directed_hausdorff(a: ObstacleCurve, b: ObstacleCurve) -> float:
    bx0, by0, bx1, by1 = _segments(b)
    worst = 0.0
    for px, py in zip(a.xs, a.ys):
        d, _ = _kernels.min_point_distance(float(px), float(py),
                                           bx0, by0, bx1, by1)
        if d > worst:
            worst = float(d)
    return worst


def _vertex_normals(ob: ObstacleCurve) -> np.ndarray:
    """Unit normals at vertices: tangent rotated +90 degrees."""
    nx = -np.sin(ob.headings)
    ny = np.cos(ob.headings)
    return np.stack([nx, ny], axis=1)


def _outward_sides(ob: ObstacleCurve) -> List[float]:
    """Normal sign(s) pointing to free space.

    Closed curve: single outward side from the signed area of the polygon.
    Open curve: both faces border free space, so both must be checked.
    """
    if not ob.closed:
        return [1.0, -1.0]
    x, y = ob.xs, ob.ys
    area2 = float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))
    # CCW parametrization (positive area): interior on the left of the
    # tangent, so outward is the -90 side.
    return [-1.0] if area2 > 0.0 else [1.0]


def rolling_ball_clearance(ob: ObstacleCurve, stride: int = 1) -> float:
    """Worst clearance of the rolled ball against its own boundary.

    For each sample p with outward normal n, the ball of radius r0 centered
    at p + r0*n touches the boundary at p; the condition requires it not to
    reach any other part of the same boundary.  Returns min over samples of
    (distance from ball center to boundary) - r0; values below ~0 (beyond
    discretization slack) are violations.
    """
    r0 = ob.r0
    ax, ay, bx, by = _segments(ob)
    normals = _vertex_normals(ob)
    worst = math.inf
    for side in _outward_sides(ob):
        for k in range(0, len(ob.xs), stride):
            cx = ob.xs[k] + side * r0 * normals[k, 0]
            cy = ob.ys[k] + side * r0 * normals[k, 1]
            d, _ = _kernels.min_point_distance(float(cx), float(cy),
                                               ax, ay, bx, by)
            c = float(d) - r0
            if c < worst:
                worst = c
    return worst


def validate_world(world: World,
                   agent_start: Optional[Sequence[float]] = None) -> ValidationReport:
    """Check the world against the admissibility assumptions.

    Never raises on a bad world: the simulator deliberately runs invalid
    worlds to demonstrate failure modes, so all findings are carried in the
    report.
    """
    r0 = world.r0
    need = SEPARATION_FACTOR * r0
    dm = world.sensor_range
    start = agent_start if agent_start is not None else world.agent_start

    separations: List[PairSeparation] = []
    for i in range(len(world.obstacles)):
        for j in range(i + 1, len(world.obstacles)):
            a, b = world.obstacles[i], world.obstacles[j]
            sep = float(_kernels.min_segment_set_distance(*_segments(a),
                                                          *_segments(b)))
            haus = max(_directed_hausdorff(a, b), _directed_hausdorff(b, a))
            separations.append(PairSeparation(
                i=i, j=j, min_separation=sep, hausdorff=haus,
                ok=sep >= need - 1e-9))

    # Discretization slack: polyline chords sit up to resolution*r0 off the
    # true curve, and the rolled ball touches tangentially at the sample.
    rolling: List[RollingBallResult] = []
    for idx, ob in enumerate(world.obstacles):
        tol = 10.0 * ob.resolution * r0
        worst = rolling_ball_clearance(ob)
        rolling.append(RollingBallResult(
            obstacle=idx, worst_clearance=worst, ok=worst >= -tol))

    curvature_ok = all(ob.curvature_bound_ok for ob in world.obstacles)

    origin_clear, _ = world.nearest_boundary_distance((0.0, 0.0))
    if start is not None:
        start_clear, _ = world.nearest_boundary_distance(start)
    else:
        start_clear = None

    return ValidationReport(
        separations=separations,
        rolling_ball=rolling,
        curvature_ok=curvature_ok,
        origin_clearance=origin_clear,
        start_clearance=start_clear,
        origin_ok=origin_clear > dm,
        start_ok=(start_clear is None or start_clear > dm),
    )


# ---------------------------------------------------------------------------
# World file schema (version 1)
#
# {
#   "version": 1,
#   "r0": 1.0,
#   "v0": 1.0,
#   "agent_start": [x, y],
#   "obstacles": [
#     {"type": "circle", "center": [x, y], "radius": R},
#     {"type": "profile", "profile": {"kind": "constant", "w": 0.5},
#      "growth_rate": L, "start_point": [x, y], "start_tangent": [tx, ty],
#      "closed": false, "enforce_curvature_bound": true}
#   ]
# }
#
# Profile kinds: "constant" {w}, "arctan_of_s" {scale}, "exp_of_s" {scale},
# "piecewise_linear" {s: [...], w: [...]}.


class WorldParseError(ValueError):
    """Raised when a world document does not match the schema."""


def make_profile(spec: Dict) -> Callable[[float], float]:
    kind = spec.get("kind")
    if kind == "constant":
        w = float(spec["w"])
        return lambda s: w
    if kind == "arctan_of_s":
        scale = float(spec.get("scale", 1.0))
        return lambda s: scale * (2.0 / math.pi) * math.atan(s)
    if kind == "exp_of_s":
        scale = float(spec.get("scale", 1.0))
        return lambda s: scale * math.exp(s)
    if kind == "piecewise_linear":
        ss = np.asarray(spec["s"], dtype=float)
        ws = np.asarray(spec["w"], dtype=float)
        if len(ss) != len(ws) or len(ss) < 2:
            raise WorldParseError("piecewise_linear needs matching s/w knots")
        return lambda s: float(np.interp(s, ss, ws))
    raise WorldParseError(f"unknown profile kind: {kind!r}")


def world_from_dict(doc: Dict, resolution: float = DEFAULT_RESOLUTION) -> World:
    try:
        version = doc.get("version", 1)
        if version != WORLD_SCHEMA_VERSION:
            raise WorldParseError(f"unsupported world schema version {version}")
        r0 = float(doc["r0"])
        v0 = float(doc["v0"])
        agent_start = doc.get("agent_start")
        obstacles = []
        for ospec in doc.get("obstacles", []):
            otype = ospec.get("type")
            if otype == "circle":
                obstacles.append(circle_obstacle(
                    ospec["center"], float(ospec["radius"]), r0,
                    resolution=float(ospec.get("resolution", resolution))))
            elif otype == "profile":
                obstacles.append(build_curve(
                    make_profile(ospec["profile"]),
                    growth_rate=float(ospec["growth_rate"]),
                    r0=r0,
                    start_point=ospec["start_point"],
                    start_tangent=ospec["start_tangent"],
                    resolution=float(ospec.get("resolution", resolution)),
                    closed=ospec.get("closed"),
                    enforce_curvature_bound=bool(
                        ospec.get("enforce_curvature_bound", True)),
                    meta={"kind": "profile",
                          "profile": ospec["profile"].get("kind")},
                ))
            else:
                raise WorldParseError(f"unknown obstacle type: {otype!r}")
        return World(obstacles, r0=r0, v0=v0, agent_start=agent_start)
    except KeyError as exc:
        raise WorldParseError(f"missing world field: {exc}") from exc


def load_world(path: str, resolution: float = DEFAULT_RESOLUTION) -> World:
    with open(path, "r", encoding="utf-8") as fh:
        return world_from_dict(json.load(fh), resolution=resolution)
