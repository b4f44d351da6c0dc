#!/usr/bin/env python3
"""Exponent against noise intensity for f = sin and f = 2 + sin.

Prints lambda (quadrature and Monte Carlo) per sigma and writes a CSV.
"""
import argparse
import csv
from pathlib import Path

import numpy as np

from phasesync import lyapunov as lyap
from phasesync.density import solve_density
from phasesync.phase_model import FourierFunction, OscillatorModel

p = argparse.ArgumentParser(description=__doc__)
p.add_argument("--sigmas", default="0.05,0.1,0.2,0.5,1,1.5,2")
p.add_argument("--rho", type=float, default=1.0)
p.add_argument("--n-paths", type=int, default=16)
p.add_argument("--horizon", type=float, default=500.0)
p.add_argument("--out", type=Path, default=Path("sigma_sweep.csv"))
args = p.parse_args()

sigmas = [float(s) for s in args.sigmas.split(",")]
couplings = {"sin": FourierFunction.sine(1), "2+sin": FourierFunction(2.0, [0.0], [1.0])}
rows = []
print(f"{'f':>6} {'sigma':>6} {'lambda_q':>12} {'lambda_q/s^2':>12} {'lambda_mc':>12} {'stderr':>9}")
for label, f in couplings.items():
    for s in sigmas:
        m = OscillatorModel(args.rho, f, s)
        lam = lyap.lyapunov_quadrature(m, solve_density(m)).value
        mc = lyap.lyapunov_monte_carlo(m, seed=0, n_paths=args.n_paths, horizon=args.horizon)
        rows.append((label, s, lam, mc.value, mc.stderr))
        print(f"{label:>6} {s:6.2f} {lam:12.6f} {lam / s**2:12.5f} {mc.value:12.6f} {mc.stderr:9.2e}")

with open(args.out, "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["coupling", "sigma", "lambda_quadrature", "lambda_mc", "lambda_mc_stderr"])
    w.writerows([(r[0], *map(repr, r[1:])) for r in rows])
print(f"all negative: {bool(np.all(np.array([r[2] for r in rows]) < 0))}; wrote {args.out}")
