"""Stratonovich integration on the circle, common-noise ensembles, pullback.

Brownian increments come from a counter-based generator: increment number k
of stream (seed, stream_id) is a pure function of those three integers, so
paths can be restarted mid-way, shifted in time, or split across threads and
still see exactly the same noise.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.random import Philox

from . import _kernels as kern
from .errors import DepthExceedsBuffer, InvalidHorizon, InvalidInput
from .phase_model import OscillatorModel, ito_drift

TWO_PI = 2.0 * math.pi
DEFAULT_DT = 1e-3
CHUNK = 1 << 16

_MASK64 = (1 << 64) - 1
_U53 = 2.0**-53


def wrap(phi):
    """Reduce to [0, 2 pi); guards the x % 2pi == 2pi rounding case."""
    r = np.mod(phi, TWO_PI)
    r = np.where(r >= TWO_PI, r - TWO_PI, r)
    return r if np.ndim(r) else float(r)


def circle_distance(x, y):
    d = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)) % TWO_PI
    d = np.minimum(d, TWO_PI - d)
    return d if np.ndim(d) else float(d)


def max_pairwise_distance(phases) -> float:
    p = np.asarray(phases, dtype=float)
    return float(np.max(circle_distance(p[:, None], p[None, :]))) if p.size > 1 else 0.0


def order_parameter(phases) -> float:
    return float(np.abs(np.mean(np.exp(1j * np.asarray(phases, dtype=float)))))


@dataclass(frozen=True)
class NoiseStream:
    """Addressable Gaussian increments dW_k ~ N(0, dt).

    Philox4x64 keyed by (seed, stream_id); counter block k//2 feeds steps
    2(k//2) and 2(k//2)+1, each step taking two 64-bit words through
    Box-Muller.
    """

    seed: int
    dt: float = DEFAULT_DT
    stream_id: int = 0

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidInput(f"dt must be positive, got {self.dt}")
        if not (0 <= self.seed <= _MASK64 and 0 <= self.stream_id <= _MASK64):
            raise InvalidInput("seed and stream_id must fit in 64 unsigned bits")

    def substream(self, stream_id: int) -> "NoiseStream":
        return NoiseStream(self.seed, self.dt, stream_id)

    def increments(self, start: int, count: int) -> np.ndarray:
        if start < 0 or count < 0:
            raise InvalidInput("increment indices must be non-negative")
        if count == 0:
            return np.empty(0)
        first_block = start // 2
        last_block = (start + count - 1) // 2
        bg = Philox(key=np.array([self.seed, self.stream_id], dtype=np.uint64), counter=first_block)
        raw = bg.random_raw(4 * (last_block - first_block + 1)).reshape(-1, 2)
        raw = raw[start - 2 * first_block : start - 2 * first_block + count]
        u1 = ((raw[:, 0] >> np.uint64(11)).astype(np.float64) + 1.0) * _U53
        u2 = (raw[:, 1] >> np.uint64(11)).astype(np.float64) * _U53
        z = np.sqrt(-2.0 * np.log(u1)) * np.cos(TWO_PI * u2)
        return math.sqrt(self.dt) * z


def _steps(horizon: float, dt: float) -> int:
    if not (horizon > 0 and math.isfinite(horizon)):
        raise InvalidHorizon(f"horizon must be positive and finite, got {horizon}")
    n = int(round(horizon / dt))
    if n < 1:
        raise InvalidHorizon(f"horizon {horizon} shorter than one step dt={dt}")
    return n


def _chunks(start: int, count: int, size: int = CHUNK):
    end = start + count
    while start < end:
        c = min(size, end - start)
        yield start, c
        start += c


class _CompiledModel:
    """Packed coefficient arrays handed to the numba kernels."""

    def __init__(self, m: OscillatorModel):
        K = max(m.coupling.K, 1)
        self.K = K
        self.rho = float(m.rho)
        self.f = kern.packed(m.coupling, K)
        self.df = kern.packed(m.d1, K)
        self.ddf = kern.packed(m.d2, K)


_SCHEMES = {"heun": kern.HEUN, "ito_em": kern.ITO_EM}


def _scheme_code(scheme: str) -> int:
    try:
        return _SCHEMES[scheme]
    except KeyError:
        raise InvalidInput(f"unknown scheme {scheme!r}; choose from {sorted(_SCHEMES)}") from None


def step_heun(m: OscillatorModel, phi, dW, dt: float):
    """Stratonovich-Heun predictor-corrector step, wrapped to [0, 2 pi)."""
    f = m.coupling
    fp = f(phi)
    pred = phi + m.rho * dt + fp * dW
    return wrap(phi + m.rho * dt + 0.5 * (fp + f(pred)) * dW)


def step_ito_em(m: OscillatorModel, phi, dW, dt: float):
    """Euler-Maruyama on the Ito form of the same equation."""
    return wrap(phi + ito_drift(m, phi) * dt + m.coupling(phi) * dW)


@dataclass(frozen=True)
class PathRecord:
    times: np.ndarray
    phases: np.ndarray
    log_deriv: np.ndarray | None = None


def simulate_path(
    m: OscillatorModel,
    stream: NoiseStream,
    x0: float,
    horizon: float,
    record_stride: int = 1,
    start_step: int = 0,
    scheme: str = "heun",
) -> PathRecord:
    """One path from ``x0`` over ``horizon``, starting at increment ``start_step``.

    Recorded times are absolute, (start_step + k * record_stride) * dt, so
    continuing a path from its last state with the matching ``start_step``
    reproduces the single long run exactly.
    """
    if record_stride < 1:
        raise InvalidInput("record_stride must be >= 1")
    dt = stream.dt
    n = _steps(horizon, dt)
    cm = _CompiledModel(m)
    code = _scheme_code(scheme)
    n_rec = n // record_stride
    out = np.empty(n_rec + 1)
    out[0] = wrap(x0)
    phi = out[0]
    filled = 1
    done = 0
    for s, c in _chunks(start_step, n):
        dW = stream.increments(s, c)
        phi, j = kern.advance(cm.f, cm.df, cm.K, cm.rho, code, phi, dW, dt, record_stride, done,
                              out[filled:])
        filled += j
        done += c
    times = (start_step + record_stride * np.arange(n_rec + 1)) * dt
    return PathRecord(times, out[:filled])


def final_state(m: OscillatorModel, stream: NoiseStream, x0, start_step: int, n_steps: int,
                scheme: str = "heun") -> np.ndarray:
    """Advance an array of phases, all on the same increments, by ``n_steps``."""
    cm = _CompiledModel(m)
    code = _scheme_code(scheme)
    phis = np.array(wrap(np.atleast_1d(np.asarray(x0, dtype=float))), dtype=float)
    for s, c in _chunks(start_step, n_steps):
        kern.advance_common(cm.f, cm.df, cm.K, cm.rho, code, phis, stream.increments(s, c), stream.dt)
    return phis


@dataclass(frozen=True)
class EnsembleSnapshot:
    t: float
    phases: np.ndarray
    max_pairwise_dist: float
    order_parameter: float


def snapshot(t: float, phases) -> EnsembleSnapshot:
    p = np.array(phases, dtype=float)
    return EnsembleSnapshot(float(t), p, max_pairwise_distance(p), order_parameter(p))


def _snapshot_steps(snapshot_times: Sequence[float], dt: float, n: int) -> list[int]:
    steps = sorted({int(round(t / dt)) for t in snapshot_times})
    if steps and (steps[0] < 0 or steps[-1] > n):
        raise InvalidInput("snapshot times must lie in [0, horizon]")
    return steps


def simulate_ensemble(
    m: OscillatorModel,
    stream: NoiseStream,
    x0s: Sequence[float],
    horizon: float,
    snapshot_times: Sequence[float],
    independent: bool = False,
    workers: int | None = None,
    scheme: str = "heun",
) -> list[EnsembleSnapshot]:
    """Evolve several initial phases and take synchronization snapshots.

    By default every member sees the increments of ``stream`` (common noise).
    With ``independent=True`` member k uses ``stream.substream(k)`` instead,
    the control experiment in which no contraction should occur.
    """
    x0s = np.asarray(x0s, dtype=float)
    if x0s.ndim != 1 or x0s.size < 2:
        raise InvalidInput("ensemble needs at least two members")
    dt = stream.dt
    n = _steps(horizon, dt)
    steps = _snapshot_steps(snapshot_times, dt, n)
    bounds = [0] + steps
    segments = [(a, b - a) for a, b in zip(bounds[:-1], bounds[1:])]

    if not independent:
        phis = np.array(wrap(x0s), dtype=float)
        states = []
        for a, c in segments:
            if c:
                phis = final_state(m, stream, phis, a, c, scheme)
            states.append(phis.copy())
    else:
        def member(k: int) -> list[np.ndarray]:
            sub = stream.substream(k)
            phi = np.array([wrap(x0s[k])])
            out = []
            for a, c in segments:
                if c:
                    phi = final_state(m, sub, phi, a, c, scheme)
                out.append(phi[0])
            return out

        with ThreadPoolExecutor(max_workers=workers) as ex:
            per_member = list(ex.map(member, range(x0s.size)))
        states = [np.array([pm[i] for pm in per_member]) for i in range(len(segments))]

    return [snapshot(s * dt, st) for s, st in zip(steps, states)]


def pullback(
    m: OscillatorModel,
    stream: NoiseStream,
    x0s: Sequence[float],
    depths: Sequence[float],
    t_max: float | None = None,
) -> list[dict]:
    """Endpoints at time 0 of trajectories started at times -T, T in ``depths``.

    The noise segment on [-t_max, 0] is fixed once: increment index i drives
    the step from time -t_max + i dt.  A start at time -T therefore begins at
    index (t_max - T) / dt, so all depths share literally the same omega.
    """
    depths = [float(d) for d in depths]
    if not depths or any(d <= 0 for d in depths):
        raise InvalidInput("depths must be positive")
    if any(b <= a for a, b in zip(depths[:-1], depths[1:])):
        raise InvalidInput("depths must be strictly increasing")
    dt = stream.dt
    t_max = depths[-1] if t_max is None else float(t_max)
    n_max = int(round(t_max / dt))
    if depths[-1] > t_max + 0.5 * dt:
        raise DepthExceedsBuffer(f"depth {depths[-1]} exceeds the noise buffer {t_max}")
    out = []
    for T in depths:
        n_T = _steps(T, dt)
        ends = final_state(m, stream, x0s, n_max - n_T, n_T)
        out.append({"depth": T, "endpoints": [float(x) for x in ends]})
    return out


def decay_slope(times, dists, lo: float = 1e-12, hi: float = 0.1, min_decades: float = 1.0):
    """Least-squares slope of log d(t) over checkpoints with lo < d < hi.

    Returns (slope, stderr, n_points).  ``None`` if the window holds fewer than
    three points or spans less than ``min_decades`` decades of separation,
    i.e. no genuine decay was observed.
    """
    t = np.asarray(times, dtype=float)
    d = np.asarray(dists, dtype=float)
    mask = (d > lo) & (d < hi)
    if mask.sum() < 3:
        return None
    tw, yw = t[mask], np.log(d[mask])
    if (yw.max() - yw.min()) / math.log(10.0) < min_decades:
        return None
    A = np.vstack([tw, np.ones_like(tw)]).T
    coef, *_ = np.linalg.lstsq(A, yw, rcond=None)
    resid = yw - A @ coef
    dof = max(tw.size - 2, 1)
    s2 = float(resid @ resid) / dof
    sxx = float(np.sum((tw - tw.mean()) ** 2))
    stderr = math.sqrt(s2 / sxx) if sxx > 0 else math.inf
    return float(coef[0]), stderr, int(tw.size)


def endpoint_sample(m: OscillatorModel, seed: int, n_paths: int, horizon: float, dt: float,
                    scheme: str = "heun", x0: float = 0.0, first_stream: int = 0) -> np.ndarray:
    """Time-``horizon`` phases of independent paths (substreams first_stream + k)."""
    base = NoiseStream(seed, dt)
    n = _steps(horizon, dt)
    return np.array([final_state(m, base.substream(first_stream + k), [x0], 0, n, scheme)[0]
                     for k in range(n_paths)])


def strong_errors(m: OscillatorModel, dts: Sequence[float], seed: int = 0, n_paths: int = 1000,
                  horizon: float = 1.0, x0: float = 1.0, refine: int = 64) -> np.ndarray:
    """RMS endpoint error of the Heun scheme at each dt against a fine reference.

    The reference runs at min(dts)/refine; coarse paths use block sums of the
    same fine increments, so every level sees one Brownian path.
    """
    dts = [float(x) for x in dts]
    dt_ref = min(dts) / refine
    n_ref = _steps(horizon, dt_ref)
    base = NoiseStream(seed, dt_ref)
    dW = np.stack([base.substream(k).increments(0, n_ref) for k in range(n_paths)])
    ref = np.full(n_paths, x0)
    for i in range(n_ref):
        ref = step_heun(m, ref, dW[:, i], dt_ref)
    rms = []
    for dt in dts:
        b = int(round(dt / dt_ref))
        if abs(b * dt_ref - dt) > 1e-12 * dt or n_ref % b:
            raise InvalidInput(f"dt={dt} is not a multiple of the reference step")
        coarse = dW.reshape(n_paths, -1, b).sum(axis=2)
        phi = np.full(n_paths, x0)
        for i in range(coarse.shape[1]):
            phi = step_heun(m, phi, coarse[:, i], dt)
        rms.append(math.sqrt(float(np.mean(circle_distance(phi, ref) ** 2))))
    return np.array(rms)
