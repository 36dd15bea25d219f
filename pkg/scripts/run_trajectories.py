"""Run both tracking experiments with the default configuration and print
per-joint mean errors and phase offsets.

    python scripts/run_trajectories.py [--config run.cfg] [--outdir runs/]
"""
import argparse
import pathlib

import numpy as np

from pm4dof.config import RunConfig, load_config
from pm4dof.simulation import JOINT_NAMES, mean_errors, phase_offsets, run_closed_loop


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--config")
    parser.add_argument("--outdir", type=pathlib.Path)
    args = parser.parse_args()
    cfg = load_config(args.config) if args.config else RunConfig()

    print(f"{'trajectory':<12}" + "".join(f"{'err ' + n + ' (m)':>16}" for n in JOINT_NAMES)
          + "".join(f"{'lag ' + n + ' (ms)':>16}" for n in JOINT_NAMES))
    for kind in ("sinusoidal", "elliptic"):
        log = run_closed_loop(cfg.trajectory.spec(kind), cfg.control.gains, cfg.control.filter, cfg.plant,
                              cfg.control.dt, params=cfg.geometry, integral_limit=cfg.control.integral_limit,
                              tau_max=cfg.control.tau_max, encoder_resolution=cfg.encoder_resolution)
        errors, lags = mean_errors(log), phase_offsets(log)
        print(f"{kind:<12}" + "".join(f"{e:>16.3e}" for e in errors) + "".join(f"{1e3 * p:>16.2f}" for p in lags))
        if args.outdir:
            args.outdir.mkdir(parents=True, exist_ok=True)
            log.to_csv(args.outdir / f"{kind}.csv")
        peak = np.max(np.abs(log.e), axis=0)
        print(f"{'  peak |e|':<12}" + "".join(f"{p:>16.3e}" for p in peak))


if __name__ == "__main__":
    main()
