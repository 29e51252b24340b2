"""Constant-speed turning dynamics with exact arc integration.

The agent moves at speed v0 and steers by a bounded curvature command: a
control u turns the heading at rate a0*u/v0 with a0 = v0^2/r0, so |u| <= M
bounds the turning radius below by r0/M.  Holding u constant over a step
traces an exact circular arc (straight line for u = 0), which keeps the
speed invariant to machine precision: the state stores the heading angle and
the velocity is derived from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Tuple

from .geometry import line_circle_crossings, saturate, wrap_angle
from .world import AttractionLine

ACTUATION_BOUND = 5.0          # M = r0 / (minimum agent turning radius)
SENSOR_RATE_FACTOR = 0.1       # default sensor slew limit, units of a0/v0


class NonpositiveDt(ValueError):
    """Raised when a step is attempted with dt <= 0."""


@dataclass(frozen=True, slots=True)
class AgentState:
    """Agent pose: position, heading and time. Velocity is v0 * e^{i heading}."""

    x: float
    y: float
    heading: float
    t: float = 0.0

    def velocity(self, v0: float) -> Tuple[float, float]:
        return v0 * math.cos(self.heading), v0 * math.sin(self.heading)


@dataclass(frozen=True)
class SimParams:
    """Scale constants and integration settings.

    a0 = v0^2/r0 is the nominal centripetal acceleration; gamma is the
    sensor slew-rate limit.  The stated default gamma (0.1 * a0/v0) is kept
    even though it is far too slow for the sensor to stay aimed during the
    locking maneuver; scenarios that need a working sensor override it (see
    presets).  dt defaults to 1e-3 in units of r0/v0.
    """

    v0: float = 1.0
    r0: float = 1.0
    actuation_bound: float = ACTUATION_BOUND
    gamma_factor: float = SENSOR_RATE_FACTOR  # gamma = factor * a0/v0
    dt_factor: float = 1e-3                   # dt = factor * r0/v0
    eps_stop: float = 0.05                    # target ball radius, units of r0
    collision_margin_factor: float = 1e-3
    max_sim_time_factor: float = 200.0        # units of r0/v0
    boundary_layer: float = 1e-3              # sliding-law boundary layer

    @cached_property
    def a0(self) -> float:
        return self.v0 * self.v0 / self.r0

    @cached_property
    def sensor_range(self) -> float:
        return 0.8 * self.r0

    @cached_property
    def gamma(self) -> float:
        """Sensor slew limit in rad per world time unit."""
        return self.gamma_factor * self.a0 / self.v0

    @cached_property
    def dt(self) -> float:
        return self.dt_factor * self.r0 / self.v0

    @cached_property
    def turn_rate_unit(self) -> float:
        """Heading rate produced by u = 1, i.e. a0/v0 = v0/r0."""
        return self.a0 / self.v0

    @cached_property
    def min_turn_radius(self) -> float:
        return self.r0 / self.actuation_bound

    @cached_property
    def eps_stop_length(self) -> float:
        return self.eps_stop * self.r0

    @cached_property
    def collision_margin(self) -> float:
        return self.collision_margin_factor * self.r0

    @cached_property
    def max_sim_time(self) -> float:
        return self.max_sim_time_factor * self.r0 / self.v0

    def with_overrides(self, **kw) -> "SimParams":
        return replace(self, **kw)


def agent_step(state: AgentState, u: float, dt: float,
               params: SimParams) -> AgentState:
    """Advance the pose by dt under a zero-order-held control u.

    u is clamped to the actuation bound before use.  The heading rotates by
    omega*dt with omega = (a0/v0)*u and the position follows the exact
    circular arc of radius v0/|omega| (a straight line for u = 0).
    """
    if dt <= 0.0:
        raise NonpositiveDt(f"dt must be positive, got {dt}")
    u = saturate(u, params.actuation_bound)
    omega = params.turn_rate_unit * u
    th0 = state.heading
    dth = omega * dt
    if abs(dth) < 1e-12:
        nx = state.x + params.v0 * dt * math.cos(th0)
        ny = state.y + params.v0 * dt * math.sin(th0)
    else:
        radius = params.v0 / omega  # signed
        nx = state.x + radius * (math.sin(th0 + dth) - math.sin(th0))
        ny = state.y + radius * (math.cos(th0) - math.cos(th0 + dth))
    return AgentState(x=nx, y=ny, heading=wrap_angle(th0 + dth),
                      t=state.t + dt)


def time_to_line_uniform_circular(state: AgentState, line: AttractionLine,
                                  params: SimParams) -> float:
    """Time for a particle in uniform circular motion to first cross the line.

    The particle leaves the given pose on a circle of radius r0 (centripetal
    acceleration a0 at speed v0); both turn directions are considered and
    the smallest positive arrival time returned.  Starting on the line only
    counts as arrival when the heading runs along it; otherwise the first
    genuine re-crossing is timed.  Tangency does not count as a crossing;
    +inf when neither circle crosses the line.
    """
    r = params.r0
    hx, hy = math.cos(state.heading), math.sin(state.heading)
    lx, ly = line.direction
    on_line = line.distance(state.x, state.y) <= 1e-9 * r
    if on_line and abs(hx * ly - hy * lx) <= 1e-9:
        return 0.0
    best = math.inf
    for turn in (+1.0, -1.0):
        # circle center sits at +-r perpendicular to the velocity
        cx = state.x - turn * r * hy
        cy = state.y + turn * r * hx
        # strict crossing: center closer than r to the line
        if line.distance(cx, cy) >= r * (1.0 - 1e-12):
            continue
        crossings = line_circle_crossings(
            line.anchor[0], line.anchor[1], lx, ly, cx, cy, r)
        start_angle = math.atan2(state.y - cy, state.x - cx)
        for tpar in crossings:
            px = line.anchor[0] + tpar * lx
            py = line.anchor[1] + tpar * ly
            ang = math.atan2(py - cy, px - cx)
            sweep = wrap_angle(ang - start_angle)
            if turn > 0:
                sweep = sweep % (2.0 * math.pi)
            else:
                sweep = (-sweep) % (2.0 * math.pi)
            if sweep <= 1e-9:
                continue  # the departure point itself
            t = sweep * r / params.v0
            if t < best:
                best = t
    return best
