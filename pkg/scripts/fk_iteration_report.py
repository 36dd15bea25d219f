"""Iteration counts of the reduced (4-equation) and full (11-equation) forward
kinematics, and how often each lands on the sampled assembly.

    python scripts/fk_iteration_report.py [-n 1000] [--warm]
"""
import argparse
import math

import numpy as np

from pm4dof.errors import NonConvergence
from pm4dof.forward_kinematics import SolverSettings, fk_full_11, fk_reduced, jacobian_phi
from pm4dof.geometry import HOME, GeometricParams, Pose
from pm4dof.inverse_kinematics import ik_active

LO = np.array([-0.1, 0.55, -math.radians(20), -math.radians(20)])
HI = np.array([0.1, 0.80, math.radians(20), math.radians(20)])
DELTA = np.array([0.02, 0.02, 0.1, 0.1])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("-n", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--warm", action="store_true", help="guess = sample + uniform perturbation")
    args = parser.parse_args()
    params = GeometricParams()
    rng = np.random.default_rng(args.seed)
    home_sign = np.sign(np.linalg.det(jacobian_phi(HOME, None, params)))

    its, hits, fails, far_side = [], np.zeros(2, int), np.zeros(2, int), 0
    for y in rng.uniform(LO, HI, size=(args.n, 4)):
        pose = Pose.from_array(y)
        far_side += np.sign(np.linalg.det(jacobian_phi(pose, None, params))) != home_sign
        guess = Pose.from_array(y + rng.uniform(-DELTA, DELTA)) if args.warm else HOME
        settings = SolverSettings(initial_guess=guess)
        active = ik_active(pose, params)
        row = []
        for k, solve in enumerate((lambda: fk_reduced(active, params, settings, full_output=True),
                                   lambda: fk_full_11(active, params, settings))):
            try:
                res = solve()
            except NonConvergence:
                fails[k] += 1
                row.append(np.nan)
                continue
            hits[k] += np.max(np.abs(res.pose.as_array() - y)) < 1e-9
            row.append(res.iterations)
        its.append(row)
    its = np.array(its, dtype=float)
    both = ~np.isnan(its).any(axis=1)
    print(f"{args.n} poses, guess = {'sample + delta' if args.warm else 'home'}")
    print(f"samples across the fold from home (det J sign flipped): {far_side}")
    for k, name in enumerate(("reduced", "full 11")):
        col = its[~np.isnan(its[:, k]), k]
        print(f"{name:<8} mean iterations {col.mean():.2f}, max {col.max():.0f}, "
              f"recovered sample {hits[k]}, no convergence {fails[k]}")
    print(f"reduced needs <= iterations of full on {np.mean(its[both, 0] <= its[both, 1]):.1%} of poses")


if __name__ == "__main__":
    main()
