"""Command-line front end.

Exit codes: 0 success, 1 a check or the mobility analysis failed, 2 usage,
parse or domain error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import io as fio
from .constraint_dof import assemble_constraints, numeric_dof_oracle, nullity
from .deploy_sim import DriveProfile, node_stats, ring_assembly, simulate
from .errors import MobilityError, ScissorKinError
from .kinematics import drive_sensitivity, sample
from .mech_model import (
    DEPLOYED_ANGLE_DEG, STOWED_ANGLE_DEG, DesignParams, build_unit, design_report, link_length_errors,
    link_lengths, positions_array, rest_angle,
)
from .oracle import fd_acceleration, fd_velocity, max_relative_error
from .screw_algebra import ring_rotation

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

VEL_TOL = 1e-6
ACC_TOL = 1e-4
CLOSURE_TOL = 1e-9
SYMMETRY_TOL = 1e-12


def _add_design_flags(p, require_diameter=False):
    g = p.add_argument_group("design")
    g.add_argument("--diameter", type=float, required=require_diameter, metavar="M",
                   help="aperture diameter in metres" + ("" if require_diameter else " (default 25)"))
    g.add_argument("--units", type=int, default=12, help="number of units in the ring (default 12)")
    g.add_argument("--height", type=float, default=None, metavar="M",
                   help="deployed unit height; defaults to the reference height for the unit count")
    g.add_argument("--deployed-angle", type=float, default=DEPLOYED_ANGLE_DEG, metavar="DEG")
    g.add_argument("--stowed-angle", type=float, default=STOWED_ANGLE_DEG, metavar="DEG")


def _add_model_flags(p):
    p.add_argument("--model", type=Path, help="mechanism JSON file; otherwise a unit is built from the design flags")
    _add_design_flags(p)


def _design(args) -> DesignParams:
    D = 25.0 if args.diameter is None else args.diameter
    return DesignParams.from_degrees(D, args.units, args.height, args.deployed_angle, args.stowed_angle)


def _model(args):
    if getattr(args, "model", None) is not None:
        return fio.read_model(args.model)
    return build_unit(_design(args))


def _write(text: str, path) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# -- subcommands --------------------------------------------------------------

def run_design(args) -> int:
    params = _design(args)
    model = build_unit(params)
    doc = {
        "design": {"D_m": params.D, "N": params.N, "H_m": params.H,
                   "theta1_deg": args.deployed_angle, "theta2_deg": args.stowed_angle},
        "link_lengths_m": link_lengths(params.H, params.theta1).as_dict(),
        "report": design_report(params).as_dict(),
    }
    _write(json.dumps(doc, indent=2) + "\n", args.output)
    if args.write_model is not None:
        fio.write_model(model, args.write_model)
    return EXIT_OK


def run_dof(args) -> int:
    model = _model(args)
    theta = math.radians(args.theta) if args.theta is not None else rest_angle(model)
    cm = assemble_constraints(model, theta)
    n, _ = nullity(cm.matrix)
    rows, cols = cm.shape
    print(f"DoF: {n}, loops: {len(cm.loops)}")
    print(f"constraint matrix: {rows} x {cols}")
    print(f"smallest nonzero singular value: {cm.smallest_nonzero_singular_value():.6g}")
    print(f"theta: {math.degrees(theta):.6g} deg")
    if cm.degenerate:
        print("warning: singular value gap is narrow; the rank decision is fragile")
    if args.oracle:
        print(f"numeric oracle DoF: {numeric_dof_oracle(model, theta)}")
    return EXIT_OK


def _profile(args) -> DriveProfile:
    kw = dict(kind=args.profile, t_deploy=args.deploy_time, cycle=args.cycle, t_cycle=args.cycle_time)
    if args.model is None:
        d = _design(args)
        kw.update(theta_start=d.theta2, theta_end=d.theta1)
    if args.start_angle is not None:
        kw["theta_start"] = math.radians(args.start_angle)
    if args.end_angle is not None:
        kw["theta_end"] = math.radians(args.end_angle)
    return DriveProfile(**kw)


def run_simulate(args) -> int:
    model = _model(args)
    log = simulate(model, _profile(args), args.dt)
    if not args.single_unit and model.design is not None and model.design.N > 1:
        log = ring_assembly(log, model.design.N, model.design.alpha, model.interface)
    if args.output is None or str(args.output) == "-":
        fio.write_trajectory_csv(log, sys.stdout)
    else:
        fio.write_trajectory_csv(log, args.output)
    if args.stats is not None:
        _write(fio.stats_to_json(node_stats(log), dict(log.meta)), args.stats)
    print(f"{len(log)} samples x {len(log.nodes)} nodes, t = 0 .. {log.t[-1]:g} s", file=sys.stderr)
    return EXIT_OK


def _checks(model, samples: int, drive_rate: float):
    """Yield (name, value, tolerance) for every oracle comparison."""
    if model.design is not None:
        lo, hi = model.design.theta2, model.design.theta1
    else:
        r = rest_angle(model)
        lo, hi = r - 0.2, r + 0.2
    thetas = np.linspace(lo, hi, samples)
    vel = acc = closure = 0.0
    dof_ok = True
    for th in thetas:
        pos = positions_array(model, th)
        closure = max(closure, float(np.max(np.abs(link_length_errors(model, pos)))))
        n = nullity(assemble_constraints(model, th).matrix)[0]
        dof_ok &= n == 1 and numeric_dof_oracle(model, th) == 1
        if not n == 1:
            continue
        theta_dot = drive_rate / drive_sensitivity(model, th) if drive_rate else 0.0
        _, _, v, _, a, _, _ = sample(model, th, theta_dot, 0.0)
        vel = max(vel, max_relative_error(v, fd_velocity(model, th, theta_dot)))
        acc = max(acc, max_relative_error(a, fd_acceleration(model, th, theta_dot)))
    yield "dof == 1 and matches numeric oracle", 0.0 if dof_ok else 1.0, 0.0
    yield "velocity vs finite difference (rel)", vel, VEL_TOL
    yield "acceleration vs finite difference (rel)", acc, ACC_TOL
    yield "loop closure: link length error (m)", closure, CLOSURE_TOL
    if model.design is not None and dof_ok:
        yield "ring symmetry (max abs mismatch)", ring_symmetry_error(model, 0.5 * (lo + hi), drive_rate), SYMMETRY_TOL


def ring_symmetry_error(model, theta: float, drive_rate: float) -> float:
    """Unit j solved in its own rotated frame against unit 0 rotated afterwards."""
    theta_dot = drive_rate / drive_sensitivity(model, theta) if drive_rate else 0.0
    ref = sample(model, theta, theta_dot, 0.0)[:5]
    worst = 0.0
    for j in range(1, model.design.N):
        R = ring_rotation(j, model.design.alpha)
        got = sample(model, theta, theta_dot, 0.0, frame=R)[:5]
        worst = max(worst, max(float(np.max(np.abs(g - r @ R.T))) for g, r in zip(got, ref)))
    return worst


def run_validate(args) -> int:
    model = _model(args)
    failed = []
    for name, value, tol in _checks(model, args.samples, args.drive_rate):
        ok = value <= tol
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {value:.3g} (tolerance {tol:g})")
        if not ok:
            failed.append(name)
    if failed:
        print("failed checks: " + "; ".join(failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def run_stats(args) -> int:
    log = fio.read_trajectory_csv(args.input)
    _write(fio.stats_to_json(node_stats(log)), args.output)
    return EXIT_OK


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scissorkin", description="Triple scissors deployable antenna kinematics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="link lengths and stowage report for a design")
    _add_design_flags(p, require_diameter=True)
    p.add_argument("-o", "--output", type=Path, help="report JSON (default stdout)")
    p.add_argument("--write-model", type=Path, metavar="FILE", help="also write the unit's mechanism JSON")
    p.set_defaults(func=run_design)

    p = sub.add_parser("dof", help="mobility from the screw constraint matrix")
    _add_model_flags(p)
    p.add_argument("--theta", type=float, metavar="DEG", help="evaluation angle (default: the rest angle)")
    p.add_argument("--oracle", action="store_true", help="also report the position-level numeric DoF")
    p.set_defaults(func=run_dof)

    p = sub.add_parser("simulate", help="deployment trajectory CSV")
    _add_model_flags(p)
    p.add_argument("--dt", type=float, default=0.05, metavar="S")
    p.add_argument("--deploy-time", type=float, default=53.0, metavar="S")
    p.add_argument("--cycle", action="store_true", help="deploy then retract")
    p.add_argument("--cycle-time", type=float, default=102.0, metavar="S")
    p.add_argument("--profile", choices=("linear", "smoothstep"), default="linear")
    p.add_argument("--start-angle", type=float, metavar="DEG")
    p.add_argument("--end-angle", type=float, metavar="DEG")
    p.add_argument("--single-unit", action="store_true", help="skip the ring assembly")
    p.add_argument("-o", "--output", type=Path, help="trajectory CSV (default stdout)")
    p.add_argument("--stats", type=Path, metavar="FILE", help="also write node statistics JSON")
    p.set_defaults(func=run_simulate)

    p = sub.add_parser("validate", help="run the oracle checks")
    _add_model_flags(p)
    p.add_argument("--samples", type=int, default=25)
    p.add_argument("--drive-rate", type=float, default=0.5, metavar="RAD_S", help="drive joint rate for the rate checks")
    p.set_defaults(func=run_validate)

    p = sub.add_parser("stats", help="per-node max/min/avg from a trajectory CSV")
    p.add_argument("input", type=Path)
    p.add_argument("-o", "--output", type=Path, help="stats JSON (default stdout)")
    p.set_defaults(func=run_stats)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MobilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ScissorKinError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
