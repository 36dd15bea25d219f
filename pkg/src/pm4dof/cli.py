"""Command-line front end: ``pm4dof {ik,fk,simulate,sweep,config}``.

Exit codes: 0 ok, 1 config/usage error, 2 unreachable or degenerate pose,
3 forward kinematics did not converge, 4 simulation reference unreachable.
Angles on the command line are in degrees.
"""
from __future__ import annotations

import argparse
import itertools
import math
import sys

import numpy as np

from .config import RunConfig, default_config_text, load_config
from .errors import ConfigError, KinematicsError, NonConvergence, UnreachableReference
from .forward_kinematics import SolverSettings, fk_full_11, fk_reduced, residual_phi, singularity_proximity
from .geometry import Pose
from .inverse_kinematics import ik_full
from .simulation import JOINT_NAMES, TRAJECTORY_KINDS, mean_errors, phase_offsets, run_closed_loop

EXIT_OK, EXIT_CONFIG, EXIT_POSE, EXIT_NO_CONVERGENCE, EXIT_REFERENCE = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _config(args) -> RunConfig:
    return load_config(args.config) if getattr(args, "config", None) else RunConfig()


def cmd_ik(args) -> int:
    cfg = _config(args)
    pose = Pose(args.x, args.z, math.radians(args.theta), math.radians(args.psi))
    try:
        full = ik_full(pose, cfg.geometry)
    except KinematicsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_POSE
    phi = residual_phi(pose, full.active, cfg.geometry)
    print("active joints (m):")
    for name, value in zip(JOINT_NAMES, full.active):
        print(f"  {name} = {value:.6f}")
    print("passive joints (deg):")
    for limb in (1, 2, 3):
        q1, q2 = np.degrees(full.u_angles[limb - 1]) + 0.0
        q4, q5, q6 = np.degrees(full.s_angles[limb - 1]) + 0.0
        print(f"  limb {limb}: q{limb}1 = {q1:.6f}  q{limb}2 = {q2:.6f}  "
              f"q{limb}4 = {q4:.6f}  q{limb}5 = {q5:.6f}  q{limb}6 = {q6:.6f}")
    q41, q43, q44 = np.degrees(full.central) + 0.0
    print(f"  limb 4: q41 = {q41:.6f}  q43 = {q43:.6f}  q44 = {q44:.6f}")
    if any(full.gimbal_lock):
        print(f"warning: spherical joint gimbal lock on limbs {[i + 1 for i, f in enumerate(full.gimbal_lock) if f]}")
    print(f"central U orientation defect = {full.central_orientation_defect:.3e}")
    print("closure residuals (m^2): " + " ".join(f"{v:.3e}" for v in phi))
    print(f"max |phi| = {np.max(np.abs(phi)):.3e} m^2")
    return EXIT_OK


def cmd_fk(args) -> int:
    cfg = _config(args)
    guess = cfg.solver.initial_guess
    if args.guess is not None:
        gx, gz, gt, gp = args.guess
        guess = Pose(gx, gz, math.radians(gt), math.radians(gp))
    settings = SolverSettings(
        max_iterations=args.max_iter if args.max_iter is not None else cfg.solver.max_iterations,
        residual_tolerance=cfg.solver.residual_tolerance,
        step_tolerance=cfg.solver.step_tolerance,
        max_halvings=cfg.solver.max_halvings,
        initial_guess=guess,
    )
    try:
        result = fk_reduced(args.lengths, cfg.geometry, settings, full_output=True)
    except NonConvergence as exc:
        print(f"error: no convergence: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    p = result.pose
    print(f"x = {p.x:.9f} m")
    print(f"z = {p.z:.9f} m")
    print(f"theta = {math.degrees(p.theta):.9f} deg")
    print(f"psi = {math.degrees(p.psi):.9f} deg")
    print(f"iterations = {result.iterations}")
    print(f"max |phi| = {result.residual:.3e} m^2")
    if args.oracle:
        try:
            full = fk_full_11(args.lengths, cfg.geometry, settings)
        except NonConvergence as exc:
            print(f"error: no convergence (11-equation oracle): {exc}", file=sys.stderr)
            return EXIT_NO_CONVERGENCE
        agreement = float(np.max(np.abs(full.pose.as_array() - p.as_array())))
        print(f"oracle iterations = {full.iterations}")
        print(f"oracle agreement = {agreement:.3e}")
    return EXIT_OK


def _fmt_joint(values) -> str:
    return f"{values[0]:g}" if len(set(values)) == 1 else ",".join(f"{v:g}" for v in values)


def cmd_simulate(args) -> int:
    cfg = _config(args)
    traj = cfg.trajectory.spec(args.traj)
    try:
        log = run_closed_loop(
            traj, cfg.control.gains, cfg.control.filter, cfg.plant, cfg.control.dt, args.duration,
            params=cfg.geometry, integral_limit=cfg.control.integral_limit,
            tau_max=cfg.control.tau_max, encoder_resolution=cfg.encoder_resolution,
        )
    except UnreachableReference as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REFERENCE
    try:
        log.to_csv(args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    meta = log.meta
    print(f"trajectory = {args.traj}  duration = {meta['duration']:g} s  dt = {meta['dt']:g} s  ticks = {len(log)}")
    print("gains " + "  ".join(f"{k} = {_fmt_joint(v)}" for k, v in meta["gains"].items()))
    print(f"wrote {args.out}")
    errors = mean_errors(log)
    print("mean signed error (m):")
    for name, value in zip(JOINT_NAMES, errors):
        print(f"  {name} = {value:.4e}")
    if args.traj == "hold":
        print("phase offset: not defined for a hold trajectory")
    else:
        print("phase offset (ms):")
        for name, value in zip(JOINT_NAMES, phase_offsets(log)):
            print(f"  {name} = {value * 1e3:.2f}")
    return EXIT_OK


def _grid(spec) -> np.ndarray:
    lo, hi, n = spec
    if n != int(n) or n < 1:
        raise ConfigError(f"grid point count must be a positive integer, got {n}")
    return np.linspace(lo, hi, int(n))


def cmd_sweep(args) -> int:
    cfg = _config(args)
    rows = ["x,z,theta_deg,psi_deg,reachable,condition"]
    for x, z, th, ps in itertools.product(_grid(args.x), _grid(args.z), _grid(args.theta), _grid(args.psi)):
        pose = Pose(float(x), float(z), math.radians(th), math.radians(ps))
        try:
            ik_full(pose, cfg.geometry)
            cond = singularity_proximity(pose, cfg.geometry)
            reachable = 1
        except KinematicsError:
            cond, reachable = float("nan"), 0
        rows.append(f"{x:.9g},{z:.9g},{th:.9g},{ps:.9g},{reachable},{cond:.9g}")
    text = "\n".join(rows) + "\n"
    if args.out:
        try:
            with open(args.out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        n_rows = len(rows) - 1
        n_ok = sum(r.split(",")[4] == "1" for r in rows[1:])
        print(f"wrote {n_rows} grid points ({n_ok} reachable) to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_config(args) -> int:
    sys.stdout.write(default_config_text())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pm4dof", description="3UPS+RPU parallel manipulator kinematics and control simulation")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ik", help="inverse kinematics of one pose")
    p.add_argument("--x", type=float, required=True, help="platform X (m)")
    p.add_argument("--z", type=float, required=True, help="platform Z (m)")
    p.add_argument("--theta", type=float, default=0.0, help="pitch (deg)")
    p.add_argument("--psi", type=float, default=0.0, help="yaw (deg)")
    p.add_argument("--config")
    p.set_defaults(func=cmd_ik)

    p = sub.add_parser("fk", help="forward kinematics from four actuator lengths")
    p.add_argument("lengths", type=float, nargs=4, metavar="LENGTH",
                   help="actuator lengths q13 q23 q33 q42 (m)")
    p.add_argument("--guess", type=float, nargs=4, metavar=("X", "Z", "THETA", "PSI"),
                   help="initial guess (m, m, deg, deg); default home pose")
    p.add_argument("--max-iter", type=int, dest="max_iter")
    p.add_argument("--oracle", action="store_true", help="also solve the 11-equation system and compare")
    p.add_argument("--config")
    p.set_defaults(func=cmd_fk)

    p = sub.add_parser("simulate", help="closed-loop tracking simulation, CSV output")
    p.add_argument("--config")
    p.add_argument("--traj", choices=TRAJECTORY_KINDS, default="sinusoidal")
    p.add_argument("--out", required=True)
    p.add_argument("--duration", type=float, help="override trajectory duration (s)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="reachability and Jacobian condition over a pose grid")
    p.add_argument("--config")
    p.add_argument("--x", type=float, nargs=3, default=(-0.1, 0.1, 5), metavar=("LO", "HI", "N"))
    p.add_argument("--z", type=float, nargs=3, default=(0.55, 0.80, 5), metavar=("LO", "HI", "N"))
    p.add_argument("--theta", type=float, nargs=3, default=(-20.0, 20.0, 3), metavar=("LO", "HI", "N"))
    p.add_argument("--psi", type=float, nargs=3, default=(-20.0, 20.0, 3), metavar=("LO", "HI", "N"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("config", help="print the default configuration")
    p.set_defaults(func=cmd_config)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
