#!/usr/bin/env python3
"""Numerical convergence: density grid refinement and Heun strong order."""
import numpy as np

from phasesync import corpus
from phasesync import dynamics as dyn
from phasesync import lyapunov as lyap
from phasesync.density import solve_density
from phasesync.errors import PhaseSyncError

print("grid refinement of the stationary density (sup change when n doubles)")
for name in ("2+sin", "0.5*sin", "1.5*sin"):
    m = corpus.models()[name]
    prev = None
    for n in (512, 1024, 2048, 4096, 8192):
        try:
            d = solve_density(m, n)
        except PhaseSyncError as exc:  # coarse grids put the series start too far from the zero
            print(f"  {name:8s} n={n:5d} {type(exc).__name__}")
            continue
        lam = lyap.lyapunov_quadrature(m, d).value
        change = "" if prev is None else f"{np.max(np.abs(d.p[::2] - prev.p)):.2e}"
        print(f"  {name:8s} n={n:5d} lambda={lam:.12f} residual={d.relative_residual(m):.1e} {change}")
        prev = d

print("\nstrong error of the Heun scheme against a dt/64 reference")
m = corpus.standard_model()
dts = [2.0**-k for k in range(3, 9)]
err = dyn.strong_errors(m, dts, n_paths=500)
for dt, e in zip(dts, err):
    print(f"  dt={dt:.5f}  rms error={e:.3e}")
print(f"  fitted order {np.polyfit(np.log(dts), np.log(err), 1)[0]:.3f}")
