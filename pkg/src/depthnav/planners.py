"""Nominal trajectory planners for the lock and unlock maneuvers.

Both maneuvers are built from minimum-feasible-radius arcs (radius inflated
by 1+epsilon over the tightest the actuation allows) joined with exact
tangency:

* lock: circle - common tangent line - circle, from the pose at first
  detection to a pose at standoff d0 above the frozen impact point, heading
  along the frozen boundary tangent;
* unlock: two externally tangent circles from the pose where tracking ends
  to a pose on the attraction line heading at the target.

Construction is done by direct tangent geometry between the turning
circles; the closed-form turn-sign predictors derived for the lock maneuver
are computed alongside as a cross-check, not trusted for construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .agent import AgentState, SimParams
from .geometry import rotate, wrap_angle
from .world import AttractionLine

TWO_PI = 2.0 * math.pi
_SPAN_SNAP = 1e-9


class PlanningFailed(RuntimeError):
    """No tangent construction matches the orientation constraints."""


@dataclass(frozen=True)
class ArcSegment:
    """Circular arc traversed at speed v0.

    ``turn`` is +1 for counterclockwise, -1 for clockwise; ``start_angle``
    is the polar angle of the entry point seen from the center; ``span`` is
    the swept angle (nonnegative).
    """

    center: Tuple[float, float]
    radius: float
    turn: int
    start_angle: float
    span: float

    def duration(self, v0: float) -> float:
        return self.radius * self.span / v0

    def pose_at(self, tau: float, v0: float) -> Tuple[float, float, float]:
        mu = self.start_angle + self.turn * (v0 * tau / self.radius)
        x = self.center[0] + self.radius * math.cos(mu)
        y = self.center[1] + self.radius * math.sin(mu)
        return x, y, wrap_angle(mu + self.turn * math.pi / 2.0)


@dataclass(frozen=True)
class LineSegment:
    start: Tuple[float, float]
    heading: float
    length: float

    def duration(self, v0: float) -> float:
        return self.length / v0

    def pose_at(self, tau: float, v0: float) -> Tuple[float, float, float]:
        d = v0 * tau
        return (self.start[0] + d * math.cos(self.heading),
                self.start[1] + d * math.sin(self.heading),
                self.heading)


Segment = Union[ArcSegment, LineSegment]


@dataclass(frozen=True)
class NominalTrajectory:
    """Tangent-continuous chain of arcs and lines with its time schedule."""

    segments: Tuple[Segment, ...]
    v0: float
    meta: Dict = field(default_factory=dict)

    @property
    def durations(self) -> List[float]:
        return [s.duration(self.v0) for s in self.segments]

    @property
    def total_time(self) -> float:
        return sum(self.durations)

    def segment_at(self, t: float) -> Tuple[int, Segment, float]:
        """Active segment index, segment, and local time at plan time t.

        Beyond the end, the final segment is extended (local time keeps
        growing), so followers always have a reference.
        """
        acc = 0.0
        for i, seg in enumerate(self.segments):
            d = seg.duration(self.v0)
            if t <= acc + d or i == len(self.segments) - 1:
                return i, seg, t - acc
            acc += d
        raise RuntimeError("empty trajectory")

    def pose_at(self, t: float) -> Tuple[float, float, float]:
        _, seg, tau = self.segment_at(t)
        return seg.pose_at(tau, self.v0)

    def end_pose(self) -> Tuple[float, float, float]:
        seg = self.segments[-1]
        return seg.pose_at(seg.duration(self.v0), self.v0)

    def sample(self, n: int = 200) -> List[Tuple[float, float]]:
        T = self.total_time
        return [self.pose_at(T * k / (n - 1))[:2] for k in range(n)]


def _snap_span(span: float) -> float:
    span = span % TWO_PI
    if span > TWO_PI - _SPAN_SNAP:
        span = 0.0
    return span


def _turn_center(x: float, y: float, heading: float, r: float,
                 turn: int) -> Tuple[float, float]:
    return (x - turn * r * math.sin(heading),
            y + turn * r * math.cos(heading))


def _csc_candidate(p0: Tuple[float, float, float],
                   p1: Tuple[float, float, float],
                   r: float, s1: int, s2: int) -> Optional[List[Segment]]:
    """One circle-straight-circle candidate, or None when infeasible."""
    x0, y0, th0 = p0
    x1, y1, th1 = p1
    c1 = _turn_center(x0, y0, th0, r, s1)
    c2 = _turn_center(x1, y1, th1, r, s2)
    dx, dy = c2[0] - c1[0], c2[1] - c1[1]
    dist = math.hypot(dx, dy)
    if dist < 1e-12:
        if s1 != s2:
            return None
        # concentric turning circles: single-arc solution
        mu0 = math.atan2(y0 - c1[1], x0 - c1[0])
        mu1 = math.atan2(y1 - c1[1], x1 - c1[0])
        span = _snap_span(s1 * (mu1 - mu0))
        return [ArcSegment(c1, r, s1, mu0, span)]
    base = math.atan2(dy, dx)
    if s1 == s2:
        t_heading = base
    else:
        sin_beta = 2.0 * r * s1 / dist
        if abs(sin_beta) > 1.0:
            return None
        t_heading = base + math.asin(sin_beta)
    # radius unit vectors at the tangent points
    m1 = (s1 * math.sin(t_heading), -s1 * math.cos(t_heading))
    m2 = (s2 * math.sin(t_heading), -s2 * math.cos(t_heading))
    t1 = (c1[0] + r * m1[0], c1[1] + r * m1[1])
    t2 = (c2[0] + r * m2[0], c2[1] + r * m2[1])
    seg_len = math.hypot(t2[0] - t1[0], t2[1] - t1[1])
    mu0 = math.atan2(y0 - c1[1], x0 - c1[0])
    mu1 = math.atan2(m1[1], m1[0])
    span1 = _snap_span(s1 * (mu1 - mu0))
    mu2 = math.atan2(m2[1], m2[0])
    mu3 = math.atan2(y1 - c2[1], x1 - c2[0])
    span2 = _snap_span(s2 * (mu3 - mu2))
    segs: List[Segment] = []
    segs.append(ArcSegment(c1, r, s1, mu0, span1))
    if seg_len > 1e-12:
        segs.append(LineSegment(t1, t_heading, seg_len))
    segs.append(ArcSegment(c2, r, s2, mu2, span2))
    return segs


def _path_length(segs: Sequence[Segment]) -> float:
    total = 0.0
    for s in segs:
        total += (s.radius * s.span if isinstance(s, ArcSegment) else s.length)
    return total


def prescribed_lock_signs(theta: float, d_m: float, d0: float, r0: float,
                          M: float, eps: float) -> Tuple[int, int]:
    """Closed-form turn-sign predictors for the lock maneuver (cross-check).

    ``theta`` is the approach angle: the agent's velocity in the impact
    frame is e^{-i theta}.  Returns (c1, c2) in the impact-frame chirality.
    """
    r = r0 * (1.0 + eps) / M
    c1v = math.cos(theta) * (1.0 + M * d0 / (r0 * (1.0 + eps))) - 1.0
    c1 = 1 if c1v >= 0.0 else -1
    # x1+ = (-d_m + i r) e^{i theta}, x3+ = i (d0 - r)
    x1r = -d_m * math.cos(theta) - r * math.sin(theta)
    x1i = -d_m * math.sin(theta) + r * math.cos(theta)
    x3i = d0 - r
    im_diff = x1i - x3i
    radicand = x1r * x1r + im_diff * im_diff - 4.0 * r * r
    if radicand < 0.0:
        return c1, 0  # predictor undefined here
    a = 2.0 * r * x1r + im_diff * math.sqrt(radicand)
    c2 = 1 if a >= 0.0 else -1
    return c1, c2


def plan_locking(agent: AgentState, frozen_impact: Tuple[float, float],
                 frozen_tangent_angle: float, params: SimParams,
                 standoff: float, eps: float) -> NominalTrajectory:
    """Plan the lock maneuver from the detection pose.

    Ends at ``standoff`` above the frozen impact point along the outward
    normal, heading along the frozen tangent.  Both arcs use the inflated
    minimum radius r0(1+eps)/M.  The shortest feasible tangent construction
    is used; the closed-form sign predictors are recorded in the metadata
    for auditing.

    Raises PlanningFailed only if no candidate exists (degenerate pose).
    """
    r = params.r0 * (1.0 + eps) / params.actuation_bound
    tx, ty = math.cos(frozen_tangent_angle), math.sin(frozen_tangent_angle)
    nx, ny = -ty, tx  # outward normal (toward the agent, by the psi fold)
    goal = (frozen_impact[0] + standoff * nx,
            frozen_impact[1] + standoff * ny,
            frozen_tangent_angle)
    start = (agent.x, agent.y, agent.heading)

    best: Optional[List[Segment]] = None
    best_len = math.inf
    best_signs = (0, 0)
    for s1 in (+1, -1):
        for s2 in (+1, -1):
            cand = _csc_candidate(start, goal, r, s1, s2)
            if cand is None:
                continue
            length = _path_length(cand)
            if length < best_len:
                best, best_len, best_signs = cand, length, (s1, s2)
    if best is None:
        raise PlanningFailed("no tangent construction from this pose")

    # Cross-check data: approach angle in the impact frame.
    vx, vy = math.cos(agent.heading), math.sin(agent.heading)
    lvx = vx * tx + vy * ty
    lvy = vx * nx + vy * ny
    theta = -math.atan2(lvy, lvx)
    c1, c2 = prescribed_lock_signs(theta, params.sensor_range, standoff,
                                   params.r0, params.actuation_bound, eps)
    return NominalTrajectory(
        segments=tuple(best), v0=params.v0,
        meta={"kind": "lock", "impact": frozen_impact,
              "tangent_angle": frozen_tangent_angle,
              "approach_angle": theta,
              "signs": best_signs, "prescribed_signs": (c1, c2),
              "radius": r, "length": best_len})


def plan_unlocking(agent: AgentState, line: AttractionLine,
                   frozen_impact: Tuple[float, float], params: SimParams,
                   eps: float) -> NominalTrajectory:
    """Plan the unlock maneuver: two tangent arcs onto the attraction line.

    The first arc turns away from the obstacle (decided from the frozen
    impact point); the second, opposite arc ends on the line heading at the
    target.  Of the two tangency solutions the forward one (progress along
    the line) is taken; its along-line advance matches the closed-form
    detour length, recorded in the metadata.
    """
    r = params.r0 * (1.0 + eps) / params.actuation_bound
    hx, hy = line.direction
    # away side: opposite the frozen impact relative to the velocity
    vx, vy = math.cos(agent.heading), math.sin(agent.heading)
    cx_imp = frozen_impact[0] - agent.x
    cy_imp = frozen_impact[1] - agent.y
    obstacle_side = vx * cy_imp - vy * cx_imp  # >0 means obstacle on the left
    s1 = -1 if obstacle_side > 0.0 else +1

    for first_turn in (s1, -s1):
        s2 = -first_turn
        c1 = _turn_center(agent.x, agent.y, agent.heading, r, first_turn)
        # centers of the final arc live on the parallel at signed offset s2*r
        # (offset measured along the left normal of the line direction)
        offset_c1 = line.signed_offset(c1[0], c1[1])
        want = s2 * r
        gap = want - offset_c1
        # solve |C2 - C1| = 2r with C2 on the parallel line
        if abs(gap) > 2.0 * r + 1e-12:
            continue
        along = math.sqrt(max(0.0, 4.0 * r * r - gap * gap))
        base = (c1[0] + gap * -hy, c1[1] + gap * hx)
        candidates = []
        for sgn in (+1.0, -1.0):
            c2 = (base[0] + sgn * along * hx, base[1] + sgn * along * hy)
            end = (c2[0] + s2 * r * hy, c2[1] - s2 * r * hx)
            # progress along the line from the agent's projection
            lam = ((end[0] - agent.x) * hx + (end[1] - agent.y) * hy)
            candidates.append((lam, c2, end))
        candidates.sort(key=lambda c: -c[0])
        for lam, c2, end in candidates:
            if lam < -1e-9:
                continue
            tangency = ((c1[0] + c2[0]) / 2.0, (c1[1] + c2[1]) / 2.0)
            mu0 = math.atan2(agent.y - c1[1], agent.x - c1[0])
            mu1 = math.atan2(tangency[1] - c1[1], tangency[0] - c1[0])
            span1 = _snap_span(first_turn * (mu1 - mu0))
            mu2 = math.atan2(tangency[1] - c2[1], tangency[0] - c2[0])
            mu3 = math.atan2(end[1] - c2[1], end[0] - c2[0])
            span2 = _snap_span(s2 * (mu3 - mu2))
            segs = (ArcSegment(c1, r, first_turn, mu0, span1),
                    ArcSegment(c2, r, s2, mu2, span2))
            return NominalTrajectory(
                segments=segs, v0=params.v0,
                meta={"kind": "unlock", "radius": r,
                      "signs": (first_turn, s2),
                      "away_first": first_turn == s1,
                      "along_line_advance": lam,
                      "length": _path_length(segs)})
    raise PlanningFailed("no unlock tangency construction from this pose")


# ---------------------------------------------------------------------------
# Offsets of the agent against the active reference segment


def offsets_vs_arc(agent: AgentState, arc: ArcSegment,
                   r0: float) -> Tuple[float, float]:
    """(Delta, delta) against an arc: signed radial offset and heading error.

    Delta > 0 means displaced to the right of the nominal travel direction
    (outside a left-turn circle, inside a right-turn one), in units of r0;
    delta is the heading error to the local nominal heading, wrapped.
    """
    rx = agent.x - arc.center[0]
    ry = agent.y - arc.center[1]
    rho = math.hypot(rx, ry)
    delta_offset = arc.turn * (rho - arc.radius) / r0
    mu = math.atan2(ry, rx)
    nominal_heading = mu + arc.turn * math.pi / 2.0
    delta_heading = wrap_angle(agent.heading - nominal_heading)
    return delta_offset, delta_heading


def offsets_vs_line(agent: AgentState, seg: LineSegment,
                    r0: float) -> Tuple[float, float]:
    """(Delta, delta) against a line: signed offset (left positive) and
    heading error, offset in units of r0."""
    hx, hy = math.cos(seg.heading), math.sin(seg.heading)
    px = agent.x - seg.start[0]
    py = agent.y - seg.start[1]
    delta_offset = (hx * py - hy * px) / r0
    delta_heading = wrap_angle(agent.heading - seg.heading)
    return delta_offset, delta_heading


def segment_chain_continuity(traj: NominalTrajectory) -> Tuple[float, float]:
    """Worst positional and heading discontinuity between segments."""
    worst_pos = 0.0
    worst_ang = 0.0
    for a, b in zip(traj.segments[:-1], traj.segments[1:]):
        xe, ye, he = a.pose_at(a.duration(traj.v0), traj.v0)
        xs, ys, hs = b.pose_at(0.0, traj.v0)
        worst_pos = max(worst_pos, math.hypot(xe - xs, ye - ys))
        worst_ang = max(worst_ang, abs(wrap_angle(he - hs)))
    return worst_pos, worst_ang
