"""depthnav: provably-safe single-sensor 2D obstacle avoidance, simulated.

A constant-speed agent with bounded turning follows the line from its start
to a fixed target, and locks onto / tracks / unlocks from unknown
curvature-bounded obstacles using one rotating depth ray.  The package
provides the world model, exact agent/sensor dynamics, the four-mode hybrid
controller with its maneuver planners, the gain-synthesis pipeline, and a
deterministic scenario harness.
"""

from .agent import AgentState, SimParams, agent_step, time_to_line_uniform_circular
from .controller import (ControllerState, Gains, Mode, controller_step,
                         u_att, u_cir, u_int, u_tr)
from .harness import (Outcome, RunVerdict, Scenario, run, scenario_from_dict,
                      scenario_from_file, sweep_noise)
from .planners import (ArcSegment, LineSegment, NominalTrajectory,
                       offsets_vs_arc, offsets_vs_line, plan_locking,
                       plan_unlocking)
from .presets import preset, preset_names
from .sensor import (Measurement, NoiseModel, SensorState, aim_command,
                     sense, sensor_step)
from .synthesis import (EllipseRegion, TrackingParams, check_constraints,
                        derive_tracking_params, derived_gamma_factor,
                        free_space_requirements, locking_clf_params,
                        lyapunov_decreasing, lyapunov_value, roa_regions,
                        synthesis_report)
from .world import (AttractionLine, ObstacleCurve, World, build_curve,
                    circle_obstacle, load_world, validate_world,
                    world_from_dict)

__version__ = "0.1.0"

__all__ = [
    "AgentState", "SimParams", "agent_step", "time_to_line_uniform_circular",
    "ControllerState", "Gains", "Mode", "controller_step",
    "u_att", "u_cir", "u_int", "u_tr",
    "Outcome", "RunVerdict", "Scenario", "run", "scenario_from_dict",
    "scenario_from_file", "sweep_noise",
    "ArcSegment", "LineSegment", "NominalTrajectory",
    "offsets_vs_arc", "offsets_vs_line", "plan_locking", "plan_unlocking",
    "preset", "preset_names",
    "Measurement", "NoiseModel", "SensorState", "aim_command", "sense",
    "sensor_step",
    "EllipseRegion", "TrackingParams", "check_constraints",
    "derive_tracking_params", "derived_gamma_factor",
    "free_space_requirements", "locking_clf_params", "lyapunov_decreasing",
    "lyapunov_value", "roa_regions", "synthesis_report",
    "AttractionLine", "ObstacleCurve", "World", "build_curve",
    "circle_obstacle", "load_world", "validate_world", "world_from_dict",
]
