"""Lyapunov exponent of the linearized phase flow, by several routes.

* quadrature:  lambda = 1/2 * int f'' f p_st
* flux form:   lambda = -rho * int (f'/f) p_st       (f without zeros)
* Monte Carlo: r_t = log|v_t| along the path, dr = f''f/2 dt + f' dW
* two-point:   decay rate of the distance between two phases on common noise
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as kern
from . import dynamics
from .density import DensityGrid, fp_residual
from .errors import InvalidParams, NoDecayWindow, StaleDensity, VanishingNoise
from .numerics import TWO_PI, periodic_integral
from .phase_model import OscillatorModel, find_zeros

STALE_RTOL = 1e-4


class Method(str, enum.Enum):
    FK_QUADRATURE = "FKQuadrature"
    FLUX_FORM = "FluxForm"
    MONTE_CARLO = "MonteCarlo"
    TWO_POINT = "TwoPoint"


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    stderr: float
    method: Method
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    I: float


@dataclass(frozen=True)
class IntervalContributions:
    intervals: tuple[Interval, ...]
    sum_check: float


def _check_fresh(m: OscillatorModel, d: DensityGrid) -> None:
    """The residual is re-evaluated against ``m``: a density solved for another model is stale too."""
    scale = 2.0 * m.rho * float(np.max(d.p))
    res = max(d.residual, fp_residual(d, m))
    if not (res <= STALE_RTOL * scale):
        raise StaleDensity(f"density residual {res:.3e} exceeds {STALE_RTOL:.0e} * 2 rho max p")


def lyapunov_quadrature(m: OscillatorModel, d: DensityGrid) -> LyapunovEstimate:
    _check_fresh(m, d)
    x = d.grid.nodes
    lam = 0.5 * periodic_integral(m.d2(x) * m.coupling(x) * d.p)
    return LyapunovEstimate(lam, 0.0, Method.FK_QUADRATURE, {"n": d.grid.n})


def lyapunov_flux_form(m: OscillatorModel, d: DensityGrid) -> LyapunovEstimate:
    zs = find_zeros(m)
    if zs.identically_zero or len(zs):
        raise VanishingNoise("flux form is singular at zeros of f; use the quadrature or Monte Carlo estimate")
    _check_fresh(m, d)
    x = d.grid.nodes
    lam = -m.rho * periodic_integral(m.d1(x) / m.coupling(x) * d.p)
    return LyapunovEstimate(lam, 0.0, Method.FLUX_FORM, {"n": d.grid.n})


def _mc_path(m: OscillatorModel, stream: dynamics.NoiseStream, x0: float, n_steps: int) -> float:
    cm = dynamics._CompiledModel(m)
    phi, r = float(x0), 0.0
    for s, c in dynamics._chunks(0, n_steps):
        phi, r = kern.advance_linearized(cm.f, cm.df, cm.ddf, cm.K, cm.rho, phi, r,
                                         stream.increments(s, c), stream.dt)
    return r


def lyapunov_monte_carlo(
    m: OscillatorModel,
    seed: int = 0,
    n_paths: int = 64,
    horizon: float = 2000.0,
    dt: float = 1e-3,
    workers: int | None = None,
) -> LyapunovEstimate:
    """Mean of r_T / T over independent paths.

    Path k uses noise substream k of ``seed`` and starts at 2 pi k / n_paths.
    Paths are independent, so they run on a thread pool; the result does not
    depend on the number of workers.
    """
    if n_paths < 2:
        raise InvalidParams("need at least two paths for a standard error")
    if not (0 < dt and horizon > 0 and horizon >= 10 * dt):
        raise InvalidParams(f"inconsistent horizon={horizon}, dt={dt}")
    n_steps = int(round(horizon / dt))
    T = n_steps * dt
    base = dynamics.NoiseStream(seed, dt)

    def run(k: int) -> float:
        return _mc_path(m, base.substream(k), TWO_PI * k / n_paths, n_steps) / T

    with ThreadPoolExecutor(max_workers=workers) as ex:
        per_path = np.array(list(ex.map(run, range(n_paths))))
    stderr = float(np.std(per_path, ddof=1) / math.sqrt(n_paths))
    return LyapunovEstimate(
        float(np.mean(per_path)), stderr, Method.MONTE_CARLO,
        {"n_paths": n_paths, "horizon": T, "dt": dt, "seed": seed},
    )


def lyapunov_two_point(
    m: OscillatorModel,
    seed: int = 0,
    x0: float = 1.0,
    y0: float = 1.05,
    horizon: float = 1000.0,
    dt: float = 1e-3,
    checkpoint: float = 0.1,
) -> LyapunovEstimate:
    """Slope of log circle-distance between two phases driven by common noise."""
    if dynamics.circle_distance(x0, y0) <= 1e-6:
        raise InvalidParams("initial phases must differ by more than 1e-6")
    stream = dynamics.NoiseStream(seed, dt)
    times = np.arange(0.0, horizon + 0.5 * checkpoint, checkpoint)
    snaps = dynamics.simulate_ensemble(m, stream, [x0, y0], horizon, times)
    t = np.array([s.t for s in snaps])
    dist = np.array([s.max_pairwise_dist for s in snaps])
    fit = dynamics.decay_slope(t, dist)
    if fit is None:
        raise NoDecayWindow("separation never decayed through the window (1e-12, 0.1)")
    slope, err, npts = fit
    return LyapunovEstimate(slope, err, Method.TWO_POINT,
                            {"horizon": horizon, "dt": dt, "seed": seed, "points": npts})


def _interval_weights(x: np.ndarray, lo: float, hi: float, h: float) -> np.ndarray:
    """Rectangle-rule weights restricted to [lo, hi] (lifted by 2 pi if needed).

    A node sitting on an endpoint gets half weight, so the weights of all
    intervals of a partition of the circle add up to h at every node.
    """
    eps = 1e-9 * h
    lifted = np.where(x < lo - eps, x + TWO_PI, x)
    w = np.where((lifted > lo + eps) & (lifted < hi - eps), h, 0.0)
    w = np.where(np.abs(lifted - lo) <= eps, 0.5 * h, w)
    w = np.where(np.abs(lifted - hi) <= eps, w + 0.5 * h, w)
    return w


def interval_contributions(m: OscillatorModel, d: DensityGrid) -> IntervalContributions:
    """I_i = int over (z_i, z_{i+1}) of f'' f p, consecutive zeros z_i.

    Uses the same nodes and weights as the quadrature estimate, partitioned
    by interval, so the I_i add up to 2 lambda up to roundoff.
    """
    x = d.grid.nodes
    g = m.d2(x) * m.coupling(x) * d.p
    zs = find_zeros(m)
    if zs.identically_zero or not len(zs):
        I = periodic_integral(g)
        intervals = (Interval(0.0, TWO_PI, I),)
    else:
        z = list(zs.phis)
        intervals = []
        for i, lo in enumerate(z):
            hi = z[i + 1] if i + 1 < len(z) else z[0] + TWO_PI
            w = _interval_weights(x, lo, hi, d.grid.h)
            intervals.append(Interval(lo, hi, float(np.sum(w * g))))
        intervals = tuple(intervals)
    lam = 0.5 * periodic_integral(g)
    total = math.fsum(iv.I for iv in intervals)
    return IntervalContributions(intervals, abs(total - 2.0 * lam))
