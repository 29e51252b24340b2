"""Four-mode hybrid controller: attract, lock, track, unlock.

Mode (attract) follows the attraction line with a linear law; on first
detection the controller freezes the impact point and tangent, plans the
lock maneuver and tracks it segment by segment (sliding law on arcs, linear
law on the straight part) while the sensor holds the frozen point; tracking
then regulates depth and ray/tangent angle with a sliding law; when the
agent re-meets the attraction line it plans the unlock maneuver (two arcs),
realigns the sensor and returns to the attract mode.

Conventions fixed here and in :mod:`depthnav.sensor`: the measurement fold
puts the tracked wall on the agent's right and the reported boundary
tangent along the travel direction, with psi (ray to tangent, ccw) nominal
near pi/2.  Positive control u turns left; on arcs the lateral offset is
positive to the right of travel, on lines positive to the left (each is the
destabilizing direction of its law's sign convention).

Sliding signs use a boundary layer (see ``SimParams.boundary_layer``) as
the numerical stand-in for the convexified discontinuous feedback.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .agent import AgentState, SimParams, time_to_line_uniform_circular
from .geometry import angle_between, saturate, sgn_bl, wrap_angle
from .planners import (ArcSegment, LineSegment, NominalTrajectory,
                       offsets_vs_arc, offsets_vs_line, plan_locking,
                       plan_unlocking)
from .sensor import Measurement, SensorState, aim_command
from .synthesis import PUBLISHED, TrackingParams
from .world import AttractionLine


class PlanMissing(RuntimeError):
    """Lock/unlock entered without a plan."""


class Mode(enum.Enum):
    ATTRACT = "attract"
    LOCK = "lock"
    TRACK = "track"
    UNLOCK = "unlock"
    STOPPED = "stopped"


class EventKind(enum.Enum):
    MODE_SWITCH = "mode_switch"
    STOP = "stop"
    TRACKING_LOST = "tracking_lost"


@dataclass(frozen=True)
class ControllerEvent:
    kind: EventKind
    t: float
    from_mode: str
    to_mode: str
    x: float
    y: float
    heading: float
    timer_at_switch: float


@dataclass(frozen=True)
class Gains:
    """Control gains and switch thresholds (published values by default).

    The tracking surface is depth_gain*(d - d0) - angle_gain*(psi -
    psi_center): depth carries the larger published coefficient 0.12 and
    the angle the smaller 0.02.  (This is the gradient of the tracking
    certificate; printing them the other way round makes the surface slide
    out of the depth band on any curved wall.)  d0 and offset_max are in
    units of r0.
    """

    M: float = 5.0
    att_heading_gain: float = 1.0
    att_offset_gain: float = 163.0
    int_heading_gain: float = 1.0
    cir_slope: float = PUBLISHED["cir_slope"]
    tr_depth_gain: float = PUBLISHED["depth_gain"]
    tr_angle_gain: float = PUBLISHED["angle_gain"]
    psi_center: float = PUBLISHED["psi_center"]
    d0: float = PUBLISHED["d0"]
    offset_max: float = PUBLISHED["offset_max"]
    heading_max: float = PUBLISHED["heading_max"]
    psi_m: float = PUBLISHED["psi_m"]
    epsilon: float = 0.151

    @property
    def int_offset_gain(self) -> float:
        """Straight-segment offset gain (M - heading_max)/offset_max."""
        return (self.M - self.heading_max) / self.offset_max

    @property
    def park_offset(self) -> float:
        """Sensor offset past perpendicular parked for tracking."""
        return self.psi_center - math.pi / 2.0

    @classmethod
    def from_synthesis(cls, params: TrackingParams) -> "Gains":
        """Gains taken straight from the derived chain (for cross-checks)."""
        return cls(
            M=params.M,
            tr_depth_gain=params.depth_gain,
            tr_angle_gain=params.angle_gain,
            psi_center=params.psi_center,
            d0=params.d0,
            offset_max=params.offset_max_published,
            heading_max=params.heading_max,
            psi_m=params.psi_m / 2.0,
            epsilon=params.epsilon,
            att_offset_gain=params.att_gain,
        )


# ---------------------------------------------------------------------------
# Mode laws (pre-saturation values; saturation is applied downstream)


def u_att(delta_offset: float, delta_heading: float,
          gains: Gains) -> float:
    """Attraction-line law: -heading_error - 163*offset (offset in r0)."""
    return (-gains.att_heading_gain * delta_heading
            - gains.att_offset_gain * delta_offset)


def u_int(delta_offset: float, delta_heading: float, gains: Gains) -> float:
    """Straight-segment law with the derived offset gain (M-dm)/Dm."""
    return (-gains.int_heading_gain * delta_heading
            - gains.int_offset_gain * delta_offset)


def u_cir(delta_offset: float, delta_heading: float, gains: Gains,
          boundary_layer: float) -> float:
    """Arc-following sliding law: -M * sgn(heading_err - slope*offset)."""
    s = delta_heading - gains.cir_slope * delta_offset
    return -gains.M * sgn_bl(s, boundary_layer)


def u_tr(d: float, psi: float, gains: Gains, r0: float,
         boundary_layer: float) -> float:
    """Tracking sliding law on (depth, ray-tangent angle).

    d is converted to units of r0; psi in radians.  Surface
    0.12*(d - d0) - 0.02*(psi - 1.71) with the published constants.
    """
    s = (gains.tr_depth_gain * (d / r0 - gains.d0)
         - gains.tr_angle_gain * (psi - gains.psi_center))
    return -gains.M * sgn_bl(s, boundary_layer)


# ---------------------------------------------------------------------------
# Controller state machine


class LockSub(enum.Enum):
    CIRC1 = "circ1"
    LINE = "line"
    CIRC2 = "circ2"


class UnlockSub(enum.Enum):
    CIRC1 = "circ1"
    CIRC2 = "circ2"
    REALIGN = "sensor_realign"


_LOCK_SUBS = {0: LockSub.CIRC1, 1: LockSub.LINE, 2: LockSub.CIRC2}


@dataclass(slots=True)
class ControllerState:
    """Discrete controller state: mode, timer, frozen geometry, plan.

    Owned and mutated by one simulation loop.
    """

    line: AttractionLine
    mode: Mode = Mode.ATTRACT
    submode: str = ""
    timer: float = 0.0
    frozen_impact: Optional[Tuple[float, float]] = None
    frozen_tangent_angle: Optional[float] = None
    plan: Optional[NominalTrajectory] = None
    t1_target: Optional[float] = None
    t2_target: Optional[float] = None
    t3_target: Optional[float] = None
    arcs_end: Optional[float] = None  # unlock: plan time when arcs finish
    # Tracking usually starts inside the line's offset band (detection
    # happened on the line); release is only armed after the track has
    # actually left the band once, so the gate times the re-approach.
    left_line_band: bool = False


@dataclass(slots=True)
class StepCommand:
    """Controller output for one step (values before saturation)."""

    u: float
    u_s: float
    state: ControllerState
    event: Optional[ControllerEvent] = None
    delta_offset: Optional[float] = None
    delta_heading: Optional[float] = None
    snap_phi: bool = False


def _freeze_from_measurement(agent: AgentState, meas: Measurement
                             ) -> Tuple[Tuple[float, float], float]:
    """Impact point and travel-oriented tangent from the (noisy) reading."""
    impact = (agent.x + meas.d * math.cos(meas.ray_angle),
              agent.y + meas.d * math.sin(meas.ray_angle))
    tangent_angle = wrap_angle(meas.ray_angle + meas.psi)
    return impact, tangent_angle


def _line_offsets(agent: AgentState, line: AttractionLine,
                  r0: float) -> Tuple[float, float]:
    delta_offset = line.signed_offset(agent.x, agent.y) / r0
    delta_heading = wrap_angle(agent.heading - line.heading)
    return delta_offset, delta_heading


def _switch(state: ControllerState, agent: AgentState, to: Mode,
            kind: EventKind = EventKind.MODE_SWITCH, **updates
            ) -> Tuple[ControllerState, ControllerEvent]:
    event = ControllerEvent(
        kind=kind, t=agent.t, from_mode=state.mode.value, to_mode=to.value,
        x=agent.x, y=agent.y, heading=agent.heading,
        timer_at_switch=state.timer)
    state.mode = to
    state.timer = 0.0
    for key, value in updates.items():
        setattr(state, key, value)
    return state, event


def controller_step(state: ControllerState, agent: AgentState,
                    sensor: SensorState, meas: Measurement,
                    params: SimParams, gains: Gains) -> StepCommand:
    """One control decision: mode law, then switch predicates, then timer.

    Returns the raw commands (saturation applied by the caller via
    agent_step / sensor_step), the successor controller state, and the
    transition event if one fired.
    """
    dt = params.dt
    r0 = params.r0
    bl = params.boundary_layer

    if state.mode == Mode.ATTRACT:
        d_off, d_head = _line_offsets(agent, state.line, r0)
        u = u_att(d_off, d_head, gains)
        u_s = 0.0
        # stop has priority over detection
        if math.hypot(agent.x, agent.y) <= params.eps_stop_length:
            new, ev = _switch(state, agent, Mode.STOPPED, kind=EventKind.STOP)
            return StepCommand(u, u_s, new, ev, d_off, d_head)
        if meas.hit:
            impact, tangent = _freeze_from_measurement(agent, meas)
            plan = plan_locking(agent, impact, tangent, params,
                                standoff=gains.d0 * r0, eps=gains.epsilon)
            new, ev = _switch(state, agent, Mode.LOCK,
                              frozen_impact=impact,
                              frozen_tangent_angle=tangent,
                              plan=plan,
                              t1_target=plan.total_time,
                              submode=LockSub.CIRC1.value)
            return StepCommand(u, u_s, new, ev, d_off, d_head)
        state.timer += dt
        return StepCommand(u, u_s, state, None, d_off, d_head)

    if state.mode == Mode.LOCK:
        if state.plan is None:
            raise PlanMissing("lock mode without a plan")
        idx, seg, _ = state.plan.segment_at(state.timer)
        if isinstance(seg, ArcSegment):
            d_off, d_head = offsets_vs_arc(agent, seg, r0)
            u = u_cir(d_off, d_head, gains, bl)
        else:
            d_off, d_head = offsets_vs_line(agent, seg, r0)
            u = u_int(d_off, d_head, gains)
        # sensor: hold the frozen impact point for most of the maneuver,
        # then blend the ray over to its tracking orientation: the frozen
        # tangent minus (pi/2 + park), i.e. leaning back past perpendicular
        # by the law's design offset.  The blend window is sized well above
        # the raw slew time since the slew budget is shared with the
        # line-of-sight feed-forward.
        park = gains.park_offset
        if params.gamma > 0:
            t_ramp = min(8.0 * (math.pi / 2.0) / params.gamma,
                         0.4 * state.t1_target)
            t_hold = min(0.1 * params.r0 / params.v0, 0.2 * state.t1_target)
        else:
            t_ramp, t_hold = math.inf, 0.0
        remaining = state.t1_target - state.timer
        w = min(1.0, max(0.0, (t_ramp + t_hold - remaining) / t_ramp))
        bearing = math.atan2(state.frozen_impact[1] - agent.y,
                             state.frozen_impact[0] - agent.x)
        park_ray = state.frozen_tangent_angle - math.pi / 2.0 - park
        desired_ray = bearing + w * wrap_angle(park_ray - bearing)
        err = wrap_angle(desired_ray - agent.heading - sensor.phi)
        dist = math.hypot(agent.x - state.frozen_impact[0],
                          agent.y - state.frozen_impact[1])
        los_rate = (params.v0 * math.sin(wrap_angle(bearing - agent.heading))
                    / max(dist, 1e-9))
        heading_rate = params.turn_rate_unit * saturate(u, gains.M)
        u_s = saturate(40.0 * err + (1.0 - w) * los_rate - heading_rate,
                       params.gamma)
        # switch predicate: timer done, standoff band, heading near tangent
        dist = math.hypot(agent.x - state.frozen_impact[0],
                          agent.y - state.frozen_impact[1])
        band = (0.5 * gains.d0 * r0 <= dist <= 1.5 * gains.d0 * r0)
        vx, vy = math.cos(agent.heading), math.sin(agent.heading)
        txa, tya = (math.cos(state.frozen_tangent_angle),
                    math.sin(state.frozen_tangent_angle))
        aligned = angle_between(vx, vy, txa, tya) <= gains.psi_m
        if state.timer >= state.t1_target and band and aligned:
            t2 = time_to_line_uniform_circular(agent, state.line, params)
            new, ev = _switch(state, agent, Mode.TRACK,
                              plan=None, submode="", t2_target=t2,
                              left_line_band=False,
                              frozen_impact=None, frozen_tangent_angle=None)
            return StepCommand(u, u_s, new, ev, d_off, d_head)
        state.timer += dt
        state.submode = _LOCK_SUBS.get(min(idx, 2), LockSub.CIRC2).value
        return StepCommand(u, u_s, state, None, d_off, d_head)

    if state.mode == Mode.TRACK:
        u_s = 0.0
        if not meas.hit:
            new, ev = _switch(state, agent, Mode.STOPPED,
                              kind=EventKind.TRACKING_LOST)
            return StepCommand(0.0, u_s, new, ev)
        u = u_tr(meas.d, meas.psi, gains, r0, bl)
        line_dist = state.line.distance(agent.x, agent.y)
        if line_dist > gains.offset_max * r0:
            state.left_line_band = True
        if (state.timer >= state.t2_target and state.left_line_band
                and line_dist <= gains.offset_max * r0):
            impact, tangent = _freeze_from_measurement(agent, meas)
            plan = plan_unlocking(agent, state.line, impact, params,
                                  eps=gains.epsilon)
            # realign budget: worst-case sensor angle at the end of the arcs
            ex, ey, eh = plan.end_pose()
            bearing = math.atan2(impact[1] - ey, impact[0] - ex)
            phi_end = abs(wrap_angle(bearing - eh))
            t3 = plan.total_time + phi_end / params.gamma
            new, ev = _switch(state, agent, Mode.UNLOCK,
                              frozen_impact=impact,
                              frozen_tangent_angle=tangent,
                              plan=plan, t3_target=t3,
                              arcs_end=plan.total_time,
                              submode=UnlockSub.CIRC1.value)
            return StepCommand(u, u_s, new, ev)
        state.timer += dt
        return StepCommand(u, u_s, state, None)

    if state.mode == Mode.UNLOCK:
        if state.plan is None:
            raise PlanMissing("unlock mode without a plan")
        snap_phi = False
        if state.timer < state.arcs_end:
            idx, seg, _ = state.plan.segment_at(state.timer)
            d_off, d_head = offsets_vs_arc(agent, seg, r0)
            u = u_cir(d_off, d_head, gains, bl)
            u_s = aim_command(agent, sensor, state.frozen_impact, params,
                              u_applied=saturate(u, gains.M))
            sub = (UnlockSub.CIRC1 if idx == 0 else UnlockSub.CIRC2).value
        else:
            # arcs done: follow the attraction line while the sensor swings
            # back to straight ahead at the full slew rate
            d_off, d_head = _line_offsets(agent, state.line, r0)
            u = u_att(d_off, d_head, gains)
            if abs(sensor.phi) <= params.gamma * dt:
                u_s = -sensor.phi / dt
                snap_phi = True
            else:
                u_s = -math.copysign(params.gamma, sensor.phi)
            sub = UnlockSub.REALIGN.value
        d_line = state.line.distance(agent.x, agent.y)
        vx, vy = math.cos(agent.heading), math.sin(agent.heading)
        aligned = angle_between(vx, vy, state.line.direction[0],
                                state.line.direction[1]) <= gains.heading_max
        phi_zero = abs(sensor.phi) <= 1e-9
        if (state.timer >= state.t3_target and aligned
                and d_line <= gains.offset_max * r0 and phi_zero):
            new, ev = _switch(state, agent, Mode.ATTRACT,
                              plan=None, submode="",
                              frozen_impact=None, frozen_tangent_angle=None,
                              arcs_end=None)
            return StepCommand(u, u_s, new, ev, d_off, d_head)
        state.timer += dt
        state.submode = sub
        return StepCommand(u, u_s, state, None, d_off, d_head,
                           snap_phi=snap_phi)

    raise RuntimeError(f"controller stepped in terminal mode {state.mode}")
