"""Rotating depth sensor: ray casting, slew-limited aiming, noise injection.

The sensor is a single ray anchored at the agent, offset by an angle phi
from the velocity.  A hit returns the depth d and the angle psi from the ray
to the boundary tangent at the impact, measured counterclockwise and folded
into (0, pi) by flipping the reported tangent orientation when needed.  The
fold guarantees two conventions used throughout the controller: psi ~ pi/2
means ray perpendicular to the wall, and the reported tangent always points
the way the agent will travel when it keeps the wall on its sensor side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from .agent import AgentState, NonpositiveDt, SimParams
from .geometry import saturate, wrap_angle
from .world import World


class TargetCoincident(ValueError):
    """Raised when the aim target sits on top of the agent."""


@dataclass(frozen=True, slots=True)
class SensorState:
    """Sensor offset angle and the optional frozen aim target."""

    phi: float = 0.0
    locked_target: Optional[Tuple[float, float]] = None


@dataclass(frozen=True, slots=True)
class Measurement:
    """One sensor reading.

    d is always present; psi, impact, obstacle_id only when d < range (a
    hit).  psi lies in (0, pi); the tangent heading of the reported
    (travel-oriented) boundary direction is ray_angle + psi.
    """

    d: float
    psi: Optional[float] = None
    impact: Optional[Tuple[float, float]] = None
    obstacle_id: Optional[int] = None
    ray_angle: float = 0.0

    @property
    def hit(self) -> bool:
        return self.psi is not None

    def tangent_angle(self) -> float:
        if self.psi is None:
            raise ValueError("no impact in this measurement")
        return wrap_angle(self.ray_angle + self.psi)


@dataclass(frozen=True)
class NoiseModel:
    """Bounded i.i.d. uniform sensor noise, deterministic given the seed.

    depth_bound is an absolute length (default d0/8 with d0 = 0.06*r0 at
    r0 = 1); angle_bound is in radians (default 1.5 degrees).
    """

    depth_bound: float = 0.06 / 8.0
    angle_bound: float = math.radians(1.5)
    seed: int = 0

    @classmethod
    def zero(cls, seed: int = 0) -> "NoiseModel":
        return cls(depth_bound=0.0, angle_bound=0.0, seed=seed)

    def with_seed(self, seed: int) -> "NoiseModel":
        return replace(self, seed=seed)

    def make_rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def sense(agent: AgentState, sensor: SensorState, world: World,
          noise: NoiseModel, rng: np.random.Generator) -> Measurement:
    """Cast the sensor ray and return the (noisy) measurement.

    No hit within range reports d equal to the range with psi absent.  Noise
    perturbs d and psi of a hit; a depth pushed to or past the range reads
    as a miss, so the hit/no-hit flag stays consistent with d.
    """
    ray_angle = wrap_angle(agent.heading + sensor.phi)
    hit = world.ray_intersect(
        (agent.x, agent.y),
        (math.cos(ray_angle), math.sin(ray_angle)),
        world.sensor_range)
    if hit is None:
        return Measurement(d=world.sensor_range, ray_angle=ray_angle)

    # Fold psi into (0, pi): flip the reported tangent if it lands on the
    # clockwise side of the ray.
    psi = wrap_angle(hit.tangent_angle - ray_angle)
    if psi <= 0.0:
        psi += math.pi

    d = hit.depth
    if noise.depth_bound > 0.0:
        d += rng.uniform(-noise.depth_bound, noise.depth_bound)
    if noise.angle_bound > 0.0:
        psi += rng.uniform(-noise.angle_bound, noise.angle_bound)
    if d >= world.sensor_range:
        return Measurement(d=world.sensor_range, ray_angle=ray_angle)
    d = max(d, 1e-9 * world.r0)

    return Measurement(d=d, psi=psi, impact=hit.impact,
                       obstacle_id=hit.obstacle_id, ray_angle=ray_angle)


def sensor_step(sensor: SensorState, u_s: float, dt: float,
                params: SimParams) -> SensorState:
    """Advance phi by the slew command, clamped to the rate limit."""
    if dt <= 0.0:
        raise NonpositiveDt(f"dt must be positive, got {dt}")
    u_s = saturate(u_s, params.gamma)
    return SensorState(phi=wrap_angle(sensor.phi + u_s * dt),
                       locked_target=sensor.locked_target)


def aim_command(agent: AgentState, sensor: SensorState,
                target: Tuple[float, float], params: SimParams,
                u_applied: float = 0.0, bearing_bias: float = 0.0,
                gain: float = 40.0) -> float:
    """Slew command keeping the ray on a fixed world point.

    Feedback on the bearing error plus the feed-forward rate of the
    line-of-sight (v0 sin(phi)/d) minus the agent's own heading rate; the
    result saturates at the slew limit.  ``bearing_bias`` offsets the aim
    from the target bearing (used to park the sensor for the tracking
    phase).

    Raises TargetCoincident when the target is within 1e-6*r0.
    """
    dx = target[0] - agent.x
    dy = target[1] - agent.y
    dist = math.hypot(dx, dy)
    if dist < 1e-6 * params.r0:
        raise TargetCoincident("aim target coincides with the agent")
    bearing = math.atan2(dy, dx)
    desired = wrap_angle(bearing - agent.heading + bearing_bias)
    err = wrap_angle(desired - sensor.phi)
    # line-of-sight rate of a fixed point: v0*sin(angle from velocity)/dist
    los_rate = params.v0 * math.sin(wrap_angle(bearing - agent.heading)) / dist
    heading_rate = params.turn_rate_unit * u_applied
    return saturate(gain * err + los_rate - heading_rate, params.gamma)
