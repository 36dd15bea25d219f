"""Worst-case Jacobian condition over the sampling box: default asymmetric
attachment angles against a symmetric-leg variant.

Report only; nothing is asserted.
"""
import argparse
import itertools
import math

import numpy as np

from pm4dof.geometry import GeometricParams, Pose
from pm4dof.forward_kinematics import singularity_proximity


def sweep(params, n):
    xs = np.linspace(-0.1, 0.1, n)
    zs = np.linspace(0.55, 0.80, n)
    angles = np.radians(np.linspace(-20, 20, n))
    conds = []
    for x, z, th, ps in itertools.product(xs, zs, angles, angles):
        pose = Pose(x, z, th, ps)
        conds.append(singularity_proximity(pose, params))
    return np.array(conds)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("-n", type=int, default=9, help="grid points per axis")
    args = parser.parse_args()
    variants = {
        "default (50/40, 40/30)": GeometricParams(),
        "symmetric (45/45, 35/35)": GeometricParams.from_degrees(beta_FD=45, beta_FI=45, beta_MD=35, beta_MI=35),
        "symmetric (50/50, 40/40)": GeometricParams.from_degrees(beta_FD=50, beta_FI=50, beta_MD=40, beta_MI=40),
    }
    print(f"grid {args.n}^4 over x [-0.1, 0.1], z [0.55, 0.80], theta/psi [-20, 20] deg")
    print(f"{'variant':<28}{'median':>12}{'p95':>12}{'max':>14}")
    for name, params in variants.items():
        c = sweep(params, args.n)
        finite = c[np.isfinite(c)]
        worst = "inf" if finite.size < c.size else f"{finite.max():.4g}"
        print(f"{name:<28}{np.median(finite):>12.4g}{np.percentile(finite, 95):>12.4g}{worst:>14}")


if __name__ == "__main__":
    main()
