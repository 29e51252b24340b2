"""Command-line interface: run scenarios, synthesize gains, validate worlds.

Exit codes of ``run``: 0 converged, 2 collided, 3 timeout or tracking lost,
1 error (bad files, bad arguments).
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import (Outcome, Scenario, ScenarioParse, run,
                      scenario_from_file, sweep_noise)
from .presets import UnknownPreset, preset, preset_names
from .synthesis import EPSILON_MAX, InfeasibleM, format_report, synthesis_report
from .world import WorldParseError, load_world, validate_world

_EXIT = {
    Outcome.CONVERGED: 0,
    Outcome.COLLIDED: 2,
    Outcome.TIMEOUT: 3,
    Outcome.TRACKING_LOST: 3,
}


def _load_scenario(spec: str) -> Scenario:
    if spec in preset_names():
        return preset(spec)
    return scenario_from_file(spec)


def _cmd_run(args) -> int:
    try:
        scenario = _load_scenario(args.scenario)
    except (ScenarioParse, WorldParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.seed is not None:
        scenario = scenario.with_seed(args.seed)
    if args.dt is not None:
        scenario.params = scenario.params.with_overrides(dt_factor=args.dt)
    if args.noise is not None:
        from .sensor import NoiseModel
        import math as _m
        db, ab = args.noise
        scenario = scenario.with_noise(NoiseModel(
            depth_bound=db * 0.06 * scenario.params.r0,
            angle_bound=_m.radians(ab),
            seed=scenario.noise.seed))
    verdict, _ = run(scenario, trace_path=args.trace)
    print(f"outcome: {verdict.outcome.value}")
    print(f"time: {verdict.t_final:.4f}")
    print(f"mode switches: {verdict.mode_switch_count}")
    print(f"min clearance: {verdict.min_clearance:.5f}")
    fx, fy, _ = verdict.final_state
    print(f"final position: ({fx:.5f}, {fy:.5f})")
    if args.trace:
        print(f"trace written to {args.trace}")
    return _EXIT[verdict.outcome]


def _cmd_synth(args) -> int:
    try:
        report = synthesis_report(args.M, args.epsilon)
    except InfeasibleM as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print(format_report(report))
    return 0


def _cmd_validate(args) -> int:
    try:
        world = load_world(args.world)
    except (WorldParseError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    report = validate_world(world)
    for line in report.summary_lines():
        print(line)
    print(f"world {'VALID' if report.ok else 'INVALID'}")
    return 0


def _cmd_sweep(args) -> int:
    try:
        scenario = _load_scenario(args.scenario)
    except (ScenarioParse, WorldParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    cells = sweep_noise(scenario, args.depth_bounds, args.angle_bounds,
                        trials=args.trials, base_seed=args.seed)
    print(f"{'depth/d0':>9} {'angle_deg':>9} {'trials':>6} "
          f"{'converged':>9} {'collided':>8} {'rate':>6}")
    for c in cells:
        print(f"{c.depth_bound_over_d0:9.3f} {c.angle_bound_deg:9.2f} "
              f"{c.trials:6d} {c.converged:9d} {c.collided:8d} "
              f"{c.success_rate:6.2f}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="depthnav",
        description="single-depth-sensor navigation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario file or preset")
    p_run.add_argument("scenario",
                       help=f"scenario JSON path or preset name "
                            f"({', '.join(preset_names())})")
    p_run.add_argument("--trace", help="write the trace CSV here")
    p_run.add_argument("--seed", type=int, help="noise seed override")
    p_run.add_argument("--dt", type=float,
                       help="integration step in units of r0/v0")
    p_run.add_argument("--noise", type=float, nargs=2,
                       metavar=("DEPTH_OVER_D0", "ANGLE_DEG"),
                       help="noise bounds override")
    p_run.set_defaults(func=_cmd_run)

    p_synth = sub.add_parser("synth", help="derive and report the gain set")
    p_synth.add_argument("--M", type=float, default=5.0,
                         help="actuation bound (default 5)")
    p_synth.add_argument("--epsilon", type=float, default=EPSILON_MAX,
                         help="arc inflation (default 0.151)")
    p_synth.add_argument("--json", action="store_true",
                         help="emit the report as JSON")
    p_synth.set_defaults(func=_cmd_synth)

    p_val = sub.add_parser("validate", help="check a world file")
    p_val.add_argument("world", help="world JSON path")
    p_val.set_defaults(func=_cmd_validate)

    p_sweep = sub.add_parser("sweep", help="noise robustness grid")
    p_sweep.add_argument("scenario", help="scenario JSON path or preset name")
    p_sweep.add_argument("--depth-bounds", type=float, nargs="+",
                         default=[0.0, 0.125],
                         help="depth-noise bounds as multiples of d0")
    p_sweep.add_argument("--angle-bounds", type=float, nargs="+",
                         default=[0.0, 1.5],
                         help="angle-noise bounds in degrees")
    p_sweep.add_argument("--trials", type=int, default=5)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.set_defaults(func=_cmd_sweep)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
