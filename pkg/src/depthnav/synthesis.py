"""Gain synthesis and certification geometry for the tracking controller.

Everything here is nondimensional: depths in units of r0, time in units of
r0/v0.  Given the actuation bound M, the pipeline fixes the sensor
misalignment budget phi_m, the sliding-surface shape (p, q), the standoff
d0 and the admissible angle band psi_m, then re-verifies the five
stabilizability constraints the derivation rests on.  Two quadratic regions
in (Delta, delta - psi0) coordinates certify the loop: a small "spurious"
ellipse around the equilibrium where the Lyapunov decrease cannot be
guaranteed, inside the larger ellipse bounding the certified region of
attraction.

The module also derives the lock-phase trajectory-tracking bounds from the
arc-radius inflation epsilon, and the free-space requirements of the lock
and unlock maneuvers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple


class InfeasibleM(ValueError):
    """Raised when the actuation bound cannot satisfy the constraints."""


class EpsilonOutOfRange(ValueError):
    """Raised for an arc-inflation factor outside (0, 0.151]."""


class DegenerateForm(ValueError):
    """Raised when the quadratic form is not positive definite."""


# Largest arc inflation compatible with the tracking hand-off bounds.
EPSILON_MAX = 0.151

# Published gain set (the values the simulations were tuned with); the
# derived chain reproduces them to ~2 significant figures.
PUBLISHED = {
    "depth_gain": 0.12,
    "angle_gain": 0.02,
    "psi_center": 1.71,
    "d0": 0.06,
    "offset_max": 0.030,
    "heading_max": 0.103,
    "psi_m": 0.58,
    "att_gain": 163.0,
    "cir_slope": 3.4,
}


@dataclass(frozen=True)
class TrackingParams:
    """Derived constant set for tracking, plus the induced control gains."""

    M: float
    phi_m: float
    psi_m: float
    d0: float
    psi0: float
    p: float
    q: float
    alpha0: float
    alpha1: float
    beta1: float
    epsilon: float
    p_lock: float
    offset_max: float          # lock-phase lateral bound (Delta_m)
    offset_max_published: float
    heading_max: float         # lock-phase heading bound (delta_m)

    @property
    def p2(self) -> float:
        return self.p * self.p

    @property
    def psi_center(self) -> float:
        return math.pi / 2.0 + self.psi0

    @property
    def depth_gain(self) -> float:
        """Depth coefficient of the tracking sliding surface (-q)."""
        return -self.q

    @property
    def angle_gain(self) -> float:
        """Angle coefficient of the tracking sliding surface (p^2)."""
        return self.p2

    @property
    def att_gain(self) -> float:
        """Offset gain of the linear-segment law, (M - delta_m)/Delta_m."""
        return (self.M - self.heading_max) / self.offset_max_published

    @property
    def cir_slope_gradient(self) -> float:
        """Arc-law surface slope from the lock CLF gradient, p_lock/sqrt(2)."""
        return self.p_lock / math.sqrt(2.0)


def feasible_phi_m(M: float) -> float:
    """Largest sensor-misalignment budget for a given actuation bound."""
    if M <= 2.0:
        raise InfeasibleM("actuation bound must exceed 2")
    root = math.sqrt(2.0 * math.acos(2.0 / M))
    q = -1.0 / (8.0 ** 0.25 * M)
    num = (1.0 / (3.0 * M * root) + q) * (1.293 * M * root)
    den = 1.0 - 5.013 * root
    return num / den


def locking_clf_params(eps: float, M: float = 5.0) -> Tuple[float, float, float]:
    """Lock-phase CLF shape and tracking-tube bounds from the inflation eps.

    Returns (p_lock, offset_max, heading_max) with p_lock = 2M/sqrt(2+eps),
    offset_max = eps/(2M) and heading_max = eps/sqrt(2+eps).
    """
    if not (0.0 < eps <= EPSILON_MAX + 1e-12):
        raise EpsilonOutOfRange(
            f"epsilon must lie in (0, {EPSILON_MAX}], got {eps}")
    p_lock = 2.0 * M / math.sqrt(2.0 + eps)
    return p_lock, eps / (2.0 * M), eps / math.sqrt(2.0 + eps)


def derive_tracking_params(M: float = 5.0,
                           eps: float = EPSILON_MAX) -> TrackingParams:
    """Run the full synthesis chain for actuation bound M.

    Raises InfeasibleM below M = 3 or when any derived constraint fails.
    """
    if M < 3.0:
        raise InfeasibleM(f"actuation bound must be at least 3, got {M}")
    phi_m = feasible_phi_m(M)
    q = -1.0 / (8.0 ** 0.25 * M)
    inner = q * q + (4.0 * q / M) * math.sin(phi_m)
    if inner < 0.0:
        raise InfeasibleM("surface-shape selection has no real solution")
    p2 = q * q - q * math.sqrt(inner)
    d0 = math.cos(phi_m) / (3.0 * M)
    cos_psi_m = 2.0 * math.cos(phi_m) / M
    if not (0.0 < cos_psi_m < 1.0):
        raise InfeasibleM("angle band selection infeasible")
    psi_m = math.acos(cos_psi_m)
    psi0 = (4.0 / 3.0) * math.tan(phi_m)
    p_lock, offset_max, heading_max = locking_clf_params(eps, M)

    params = TrackingParams(
        M=M, phi_m=phi_m, psi_m=psi_m, d0=d0, psi0=psi0,
        p=math.sqrt(p2), q=q,
        alpha0=math.cos(phi_m) / 2.0,
        alpha1=3.0 * math.cos(phi_m) / 2.0,
        beta1=3.0 * M / 4.0,
        epsilon=eps, p_lock=p_lock,
        offset_max=offset_max,
        offset_max_published=PUBLISHED["offset_max"],
        heading_max=heading_max,
    )
    report = check_constraints(params)
    if not report.all_ok:
        bad = [c.name for c in report.constraints if not c.ok]
        raise InfeasibleM(f"derived parameters violate constraints: {bad}")
    return params


@dataclass(frozen=True)
class Constraint:
    name: str
    description: str
    slack: float
    ok: bool


@dataclass(frozen=True)
class ConstraintReport:
    constraints: Tuple[Constraint, ...]

    @property
    def all_ok(self) -> bool:
        return all(c.ok for c in self.constraints)

    def lines(self) -> List[str]:
        return [f"{c.name}: slack {c.slack:+.5f} {'ok' if c.ok else 'FAIL'}  "
                f"({c.description})" for c in self.constraints]


def check_constraints(params: TrackingParams) -> ConstraintReport:
    """Re-verify the five stabilizability constraints with slacks."""
    M, phi_m = params.M, params.phi_m
    sin_phi = math.sin(phi_m)
    cos_phi = math.cos(phi_m)
    a0_, a1_ = params.alpha0, params.alpha1
    p2, q = params.p2, params.q
    cons = (
        Constraint("angle-band", "psi_m > sin(phi_m)/alpha0",
                   params.psi_m - sin_phi / a0_,
                   params.psi_m > sin_phi / a0_),
        Constraint("misalignment", "phi_m > sin(phi_m)/alpha1",
                   phi_m - sin_phi / a1_,
                   phi_m > sin_phi / a1_),
        Constraint("standoff", "2cos(phi_m) - 3*d0*M > 0",
                   2.0 * cos_phi - 3.0 * params.d0 * M,
                   2.0 * cos_phi - 3.0 * params.d0 * M > 0.0),
        Constraint("authority", "2M cos(psi_m) > 2cos(phi_m) - 3*d0*M",
                   2.0 * M * math.cos(params.psi_m)
                   - (2.0 * cos_phi - 3.0 * params.d0 * M),
                   2.0 * M * math.cos(params.psi_m)
                   > 2.0 * cos_phi - 3.0 * params.d0 * M),
        Constraint("surface-fit",
                   "sin(phi_m)/alpha1 - p^2 (M - beta1)/(alpha1 q) > psi0",
                   sin_phi / a1_ - (p2 / (a1_ * q)) * (M - params.beta1)
                   - params.psi0,
                   sin_phi / a1_ - (p2 / (a1_ * q)) * (M - params.beta1)
                   > params.psi0),
    )
    return ConstraintReport(constraints=cons)


@dataclass(frozen=True)
class EllipseRegion:
    """Sublevel set {Delta^2 + p^2 eta^2 + 2 q Delta eta <= level}.

    Coordinates are (Delta, eta) = (d - d0, delta - psi0).
    """

    p2: float
    q: float
    level: float
    role: str

    def value(self, delta_depth: float, eta: float) -> float:
        return (delta_depth * delta_depth + self.p2 * eta * eta
                + 2.0 * self.q * delta_depth * eta)

    def contains(self, delta_depth: float, eta: float) -> bool:
        return self.value(delta_depth, eta) <= self.level

    @property
    def det(self) -> float:
        return self.p2 - self.q * self.q

    @property
    def max_abs_depth(self) -> float:
        return math.sqrt(self.level * self.p2 / self.det)

    @property
    def max_abs_eta(self) -> float:
        return math.sqrt(self.level / self.det)


@dataclass(frozen=True)
class RoaRegions:
    spurious: EllipseRegion
    max_roa: EllipseRegion
    box_depth_ok: bool
    box_angle_ok: bool

    @property
    def box_ok(self) -> bool:
        return self.box_depth_ok and self.box_angle_ok


def roa_regions(params: TrackingParams) -> RoaRegions:
    """Spurious and maximal-region ellipses, plus the physical-box check.

    The certified region must fit inside |Delta| <= d0/2 and
    |delta| <= psi_m - psi0 to be physically meaningful.
    """
    p2, q = params.p2, params.q
    if p2 <= q * q:
        raise DegenerateForm("p^2 must exceed q^2 for a definite form")
    tan_phi = math.tan(params.phi_m)
    spurious_level = (4.0 * p2 / (9.0 * q * q)) * (p2 - q * q) * tan_phi ** 2
    roa_level = p2 * ((2.0 / 3.0) * tan_phi
                      + params.M * p2 / (6.0 * q * math.cos(params.phi_m))) ** 2
    spurious = EllipseRegion(p2=p2, q=q, level=spurious_level, role="spurious")
    max_roa = EllipseRegion(p2=p2, q=q, level=roa_level, role="max_roa")
    return RoaRegions(
        spurious=spurious,
        max_roa=max_roa,
        box_depth_ok=max_roa.max_abs_depth <= params.d0 / 2.0 + 1e-12,
        box_angle_ok=max_roa.max_abs_eta <= params.psi_m - params.psi0 + 1e-12,
    )


def lyapunov_value(delta_depth: float, delta_angle: float,
                   params: TrackingParams) -> float:
    """Quadratic certificate V at depth error Delta and angle error delta.

    V = Delta^2 + p^2 (delta - psi0)^2 + 2 q Delta (delta - psi0); vanishes
    at the tracked equilibrium and is positive definite since p^2 > q^2.
    """
    eta = delta_angle - params.psi0
    return (delta_depth * delta_depth + params.p2 * eta * eta
            + 2.0 * params.q * delta_depth * eta)


@dataclass(frozen=True)
class LyapunovAudit:
    samples: int
    audited: int
    violations: int
    worst_increase: float

    @property
    def ok(self) -> bool:
        return self.violations == 0


def lyapunov_decreasing(depth_errors, angle_errors,
                        params: TrackingParams,
                        regions: Optional[RoaRegions] = None,
                        tol: float = 1e-12) -> LyapunovAudit:
    """Audit a sampled trajectory window for monotone decrease of V.

    A step counts as audited when the state starts inside the certified
    region and outside the spurious ellipse; within the spurious ellipse the
    decrease is not guaranteed and the step is skipped.  ``tol`` absorbs
    floating-point dust, not model error.
    """
    if regions is None:
        regions = roa_regions(params)
    n = min(len(depth_errors), len(angle_errors))
    audited = 0
    violations = 0
    worst = 0.0
    prev_v = None
    prev_in = False
    for k in range(n):
        v = lyapunov_value(depth_errors[k], angle_errors[k], params)
        if prev_v is not None and prev_in:
            audited += 1
            inc = v - prev_v
            if inc > tol:
                violations += 1
                worst = max(worst, inc)
        eta = angle_errors[k] - params.psi0
        prev_in = (regions.max_roa.contains(depth_errors[k], eta)
                   and not regions.spurious.contains(depth_errors[k], eta))
        prev_v = v
    return LyapunovAudit(samples=n, audited=audited,
                         violations=violations, worst_increase=worst)


@dataclass(frozen=True)
class FreeSpaceReport:
    """Free-space lengths required by the maneuvers, in units of r0.

    lock_tube: radius of the obstacle neighborhood the lock maneuver stays
    in; must be below 1 (i.e. r0).  unlock_depth: off-line excursion of the
    worst-case unlock maneuver.  sensor_arc: path length consumed while the
    sensor realigns at the slew limit; depends on gamma and dominates under
    the slow default.
    """

    lock_tube: float
    unlock_depth: float
    sensor_arc: float
    gamma_factor: float

    @property
    def lock_tube_ok(self) -> bool:
        return self.lock_tube < 1.0

    @property
    def unlock_within_lock(self) -> bool:
        return (self.unlock_depth <= self.lock_tube
                and self.sensor_arc <= self.lock_tube)


def derived_gamma_factor(M: float = 5.0, eps: float = EPSILON_MAX,
                         d0: float = PUBLISHED["d0"]) -> float:
    """Sensor slew rate needed to hold the aim through a lock maneuver.

    The bearing of a fixed impact point sweeps at up to v0/d plus the
    agent's own heading rate M/(1+eps) while arcing, so the slew limit must
    cover M/(1+eps) + 2/d0 (in units of a0/v0).
    """
    return M / (1.0 + eps) + 2.0 / d0


def free_space_requirements(M: float = 5.0, eps: float = EPSILON_MAX,
                            d0: float = PUBLISHED["d0"],
                            gamma_factor: float = 0.1) -> FreeSpaceReport:
    """Free-space arithmetic for the lock and unlock maneuvers."""
    lock_tube = 3.0 * (1.0 + eps) / M + 1.5 * d0
    unlock_depth = (math.sqrt(3.0) + 1.0) * (1.0 + eps) / M
    sensor_arc = math.pi / gamma_factor
    return FreeSpaceReport(lock_tube=lock_tube, unlock_depth=unlock_depth,
                           sensor_arc=sensor_arc, gamma_factor=gamma_factor)


# ---------------------------------------------------------------------------
# Report assembly (used by the CLI `synth` subcommand)


def synthesis_report(M: float = 5.0, eps: float = EPSILON_MAX) -> Dict:
    """Full parameter/constraint/free-space report as a plain dict."""
    params = derive_tracking_params(M, eps)
    cons = check_constraints(params)
    regions = roa_regions(params)
    fs_paper = free_space_requirements(M, eps, PUBLISHED["d0"], 0.1)
    gamma_req = derived_gamma_factor(M, eps, PUBLISHED["d0"])
    fs_derived = free_space_requirements(M, eps, PUBLISHED["d0"], gamma_req)
    return {
        "M": M,
        "epsilon": eps,
        "derived": {
            "phi_m": params.phi_m,
            "psi_m": params.psi_m,
            "psi_m_half": params.psi_m / 2.0,
            "d0": params.d0,
            "psi0": params.psi0,
            "psi_center": params.psi_center,
            "p_squared": params.p2,
            "q": params.q,
            "alpha0": params.alpha0,
            "alpha1": params.alpha1,
            "beta1": params.beta1,
            "p_lock": params.p_lock,
            "heading_max": params.heading_max,
            "offset_max_bound": params.offset_max,
            "att_gain": params.att_gain,
            "cir_slope_gradient": params.cir_slope_gradient,
            "cir_slope_half_p": params.p_lock / 2.0,
        },
        "published": dict(PUBLISHED),
        "discrepancies": {
            "offset_max": {
                "derived_bound": params.offset_max,
                "published": PUBLISHED["offset_max"],
                "note": "published value equals eps/M, the derived bound "
                        "eps/(2M); controller ships the published one",
            },
            "psi_m": {
                "derived": params.psi_m,
                "published": PUBLISHED["psi_m"],
                "note": "published switch threshold is half the derived "
                        "band; the conservative half is used for switching",
            },
            "cir_slope": {
                "published": PUBLISHED["cir_slope"],
                "gradient": params.cir_slope_gradient,
                "half_p": params.p_lock / 2.0,
                "note": "published 3.4 matches p_lock/2, the CLF gradient "
                        "gives p_lock/sqrt(2); controller ships 3.4",
            },
        },
        "constraints": [
            {"name": c.name, "description": c.description,
             "slack": c.slack, "ok": c.ok} for c in cons.constraints
        ],
        "regions": {
            "spurious_level": regions.spurious.level,
            "max_roa_level": regions.max_roa.level,
            "max_abs_depth": regions.max_roa.max_abs_depth,
            "max_abs_eta": regions.max_roa.max_abs_eta,
            "box_ok": regions.box_ok,
        },
        "free_space": {
            "lock_tube": fs_paper.lock_tube,
            "unlock_depth": fs_paper.unlock_depth,
            "gamma_default": {
                "gamma_factor": 0.1,
                "sensor_arc": fs_paper.sensor_arc,
                "unlock_within_lock": fs_paper.unlock_within_lock,
            },
            "gamma_derived": {
                "gamma_factor": gamma_req,
                "sensor_arc": fs_derived.sensor_arc,
                "unlock_within_lock": fs_derived.unlock_within_lock,
            },
        },
    }


def format_report(report: Dict) -> str:
    d = report["derived"]
    lines = [
        f"gain synthesis for actuation bound M = {report['M']:g} "
        f"(arc inflation epsilon = {report['epsilon']:g})",
        "",
        f"  misalignment budget phi_m   {d['phi_m']:.6f} rad",
        f"  angle band psi_m            {d['psi_m']:.6f} "
        f"(switch threshold {d['psi_m_half']:.6f})",
        f"  standoff d0                 {d['d0']:.6f} r0",
        f"  surface shape p^2, q        {d['p_squared']:.6f}, {d['q']:.6f}",
        f"  tracking center psi_center  {d['psi_center']:.6f} rad",
        f"  tracking gains (depth, ang) {-d['q']:.4f}, {d['p_squared']:.4f}",
        f"  line-law offset gain        {d['att_gain']:.3f}",
        f"  lock CLF p_lock             {d['p_lock']:.6f}",
        f"  lock bounds (offset, head)  {d['offset_max_bound']:.6f} "
        f"(published {report['published']['offset_max']:g}), "
        f"{d['heading_max']:.6f}",
        f"  arc-law slope               published "
        f"{report['published']['cir_slope']:g}, p/2 {d['cir_slope_half_p']:.4f}, "
        f"p/sqrt2 {d['cir_slope_gradient']:.4f}",
        "",
        "constraints:",
    ]
    for c in report["constraints"]:
        lines.append(f"  {c['name']:<14} slack {c['slack']:+.5f} "
                     f"{'ok' if c['ok'] else 'FAIL'}")
    r = report["regions"]
    lines += [
        "",
        f"regions: spurious level {r['spurious_level']:.4e}, "
        f"certified level {r['max_roa_level']:.4e}, "
        f"box fit {'ok' if r['box_ok'] else 'FAIL'}",
    ]
    fs = report["free_space"]
    lines += [
        "",
        f"free space: lock tube {fs['lock_tube']:.4f} r0 "
        f"({'< r0 ok' if fs['lock_tube'] < 1 else 'EXCEEDS r0'}), "
        f"unlock depth {fs['unlock_depth']:.4f} r0",
        f"  gamma default  {fs['gamma_default']['gamma_factor']:.4f}: "
        f"sensor arc {fs['gamma_default']['sensor_arc']:.3f} r0, "
        f"unlock within lock: "
        f"{'yes' if fs['gamma_default']['unlock_within_lock'] else 'NO (flagged)'}",
        f"  gamma derived  {fs['gamma_derived']['gamma_factor']:.4f}: "
        f"sensor arc {fs['gamma_derived']['sensor_arc']:.3f} r0, "
        f"unlock within lock: "
        f"{'yes' if fs['gamma_derived']['unlock_within_lock'] else 'NO (flagged)'}",
    ]
    return "\n".join(lines)
