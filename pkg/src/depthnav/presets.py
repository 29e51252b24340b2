"""Scenario presets reconstructing the four headline situations.

The published figures give no coordinates, so these are qualitative
reconstructions with the stated properties:

* ``fig1a``: a valid multi-obstacle field the agent must thread to reach
  the target;
* ``fig1b``: a hairpin pocket that satisfies the curvature bound but
  violates the rolling-ball (sharp-turning) condition, producing a
  collision during the lock maneuver;
* ``fig1c``: a gently curving open wall, curvature profile (2/pi)*atan(s),
  tracked and released cleanly;
* ``fig1d``: the same situation with curvature profile e^s, which breaks
  the curvature bound and defeats tracking.

All presets run with the derived sensor slew rate (the stated default of
0.1 a0/v0 cannot keep the sensor aimed through a lock maneuver; see the
synthesis report).  Noise defaults to zero; runs add it explicitly.
"""

from __future__ import annotations

import math
from typing import Dict

from .agent import SimParams
from .harness import Scenario
from .sensor import NoiseModel
from .synthesis import derived_gamma_factor


class UnknownPreset(KeyError):
    pass


_GAMMA = derived_gamma_factor()


def _params(**kw) -> SimParams:
    base = dict(v0=1.0, r0=1.0, gamma_factor=_GAMMA, dt_factor=1e-3,
                eps_stop=0.05)
    base.update(kw)
    return SimParams(**base)


def _fig1a_world() -> Dict:
    return {
        "version": 1,
        "r0": 1.0,
        "v0": 1.0,
        "agent_start": [-11.0, -4.0],
        "obstacles": [
            {"type": "circle", "center": [-7.0, -2.35], "radius": 1.0},
            {"type": "circle", "center": [-2.9, -1.35], "radius": 1.3},
            {"type": "circle", "center": [-6.2, 1.6], "radius": 1.0},
        ],
    }


def _fig1b_world() -> Dict:
    # Hairpin: two straight arms joined by a curvature-1 bend of 152
    # degrees, so the arms converge at ~28 degrees.  |w| <= 1 everywhere,
    # but the pocket narrows below 2*r0 and the rolling-ball condition
    # fails.  The pocket opens toward the approaching agent.
    bend = math.radians(152.0)
    arm = 3.2
    length = 2.0 * arm + bend  # curvature 1/r0 over the bend
    s1 = arm / length
    s2 = (arm + bend) / length
    eps = 0.004
    return {
        "version": 1,
        "r0": 1.0,
        "v0": 1.0,
        "agent_start": [-9.0, 0.0],
        "obstacles": [
            {"type": "profile",
             "profile": {"kind": "piecewise_linear",
                         "s": [0.0, s1 - eps, s1 + eps, s2 - eps, s2 + eps, 1.0],
                         "w": [0.0, 0.0, 1.0, 1.0, 0.0, 0.0]},
             "growth_rate": length,
             "start_point": [-1.2, -1.35],
             "start_tangent": [-1.0, 0.25],
             "closed": False},
        ],
    }


def _fig1c_world() -> Dict:
    # Open wall, curvature (2/pi)*atan(s) in [0, 0.5]: nearly straight at
    # one end, gently hooking at the other.  Placed to cross the approach
    # line obliquely so the agent locks on, tracks along the convex side
    # and is released back onto the line past the wall.
    return {
        "version": 1,
        "r0": 1.0,
        "v0": 1.0,
        "agent_start": [-8.0, 0.0],
        "obstacles": [
            {"type": "profile",
             "profile": {"kind": "arctan_of_s"},
             "growth_rate": 7.0,
             "start_point": [-1.0, -2.2],
             "start_tangent": [-0.97, 0.26],
             "closed": False},
        ],
    }


def _fig1d_world() -> Dict:
    # Same situation as fig1c but curvature e^s in [1, 2.72]: the wall
    # coils tighter than the tracking design tolerates.  Built with the
    # curvature bound check waived; validation flags it.
    return {
        "version": 1,
        "r0": 1.0,
        "v0": 1.0,
        "agent_start": [-8.0, 0.0],
        "obstacles": [
            {"type": "profile",
             "profile": {"kind": "exp_of_s"},
             "growth_rate": 3.2,
             "start_point": [-1.3, -0.6],
             "start_tangent": [-0.97, 0.26],
             "closed": False,
             "enforce_curvature_bound": False},
        ],
    }


_PRESETS = {
    "fig1a": _fig1a_world,
    "fig1b": _fig1b_world,
    "fig1c": _fig1c_world,
    "fig1d": _fig1d_world,
}


def preset(name: str) -> Scenario:
    """Build a preset scenario by name (fig1a, fig1b, fig1c, fig1d)."""
    try:
        world = _PRESETS[name]()
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; "
                            f"choose from {sorted(_PRESETS)}") from None
    return Scenario(
        name=name,
        world_doc=world,
        params=_params(),
        noise=NoiseModel.zero(),
        trace_decimation=10,
        resolution=2e-4,
    )


def preset_names():
    return sorted(_PRESETS)
