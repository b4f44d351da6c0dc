"""Stationary density of the phase oscillator.

The stationary Fokker-Planck equation integrates once to the first-order
relation

    f^2 p' = (2 rho - f' f) p + C,

with C an unknown flux constant.  Without zeros of f this is a regular
linear ODE on the circle (periodicity plus normalization fix p(0) and C).
With zeros it is singular there and the relation itself forces
p(z) = -C / (2 rho) at every zero z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import solve_ivp

from . import dynamics
from .errors import (
    IllConditioned,
    InvalidInput,
    InvalidTimes,
    MidpointMismatch,
    NonTransversalZero,
    NotNonVanishing,
)
from .numerics import (
    DEFAULT_N,
    TWO_PI,
    CircleGrid,
    central_diff4,
    damped_antiderivative,
    periodic_integral,
    spectral_cumulative_integral,
    spectral_shift,
)
from .phase_model import NoiseCase, OscillatorModel, check_genericity, find_zeros

COND_LIMIT = 1e12
MATCHING_RTOL = 1e-4
BOUNDARY_OFFSET_CELLS = 4
IVP_RTOL = 1e-10
IVP_ATOL = 1e-12


@dataclass(frozen=True)
class DensityGrid:
    grid: CircleGrid
    p: np.ndarray
    C: float
    case: NoiseCase
    residual: float = math.nan
    zeros: tuple[float, ...] = ()

    @property
    def phi(self) -> np.ndarray:
        return self.grid.nodes

    def relative_residual(self, m: OscillatorModel) -> float:
        return self.residual / (2.0 * m.rho * float(np.max(self.p)))


@dataclass(frozen=True)
class EmpiricalDensity:
    bins: int
    counts: np.ndarray
    estimate: np.ndarray
    total_samples: int
    burn_in_time: float

    @property
    def centers(self) -> np.ndarray:
        w = TWO_PI / self.bins
        return (np.arange(self.bins) + 0.5) * w


def _finish(grid: CircleGrid, p: np.ndarray, C: float, case: NoiseCase, m: OscillatorModel,
            zeros=()) -> DensityGrid:
    if np.min(p) < -1e-9 * max(float(np.max(np.abs(p))), 1.0):
        raise IllConditioned(f"solver produced a negative density (min {np.min(p):.3e})")
    p = np.maximum(p, 0.0)
    p.flags.writeable = False
    d = DensityGrid(grid, p, float(C), case, zeros=tuple(float(z) for z in zeros))
    return replace(d, residual=fp_residual(d, m))


def uniform_density(m: OscillatorModel, n: int = DEFAULT_N) -> DensityGrid:
    """Constant coupling (including zero): p = 1/(2 pi), C = -rho/pi."""
    grid = CircleGrid(n)
    return _finish(grid, np.full(n, 1.0 / TWO_PI), -m.rho / math.pi, NoiseCase.NON_VANISHING, m)


def _equilibrated_cond(M: np.ndarray) -> float:
    scale = np.max(np.abs(M), axis=0)
    if np.any(scale == 0) or not np.all(np.isfinite(M)):
        return math.inf
    return float(np.linalg.cond(M / scale))


def solve_density_nonvanishing(m: OscillatorModel, n: int = DEFAULT_N,
                               method: str = "superposition") -> DensityGrid:
    """Periodic solution of p' = (2 rho/f^2 - f'/f) p + C/f^2 for f without zeros.

    With h = int_0 2 rho/f^2 and Q = int_0 e^{-h}/f, every solution is
    p = e^h (f(0) p(0) + C Q) / f: affine in (p(0), C).  ``superposition``
    builds the (1, 0) and (0, 1) solutions and solves the 2x2 system for
    periodicity and unit mass.  ``periodic`` uses the closed periodic form
    of q = f p (see ``_periodic_form``), which involves no growing
    exponentials and stays accurate where the 2x2 system does not.

    All antiderivatives come from the trigonometric interpolant, so the
    result is spectrally accurate in n.
    """
    zs = find_zeros(m)
    if zs.identically_zero or len(zs):
        raise NotNonVanishing(f"coupling vanishes at {len(zs)} point(s); use solve_density_vanishing")
    if m.coupling.is_constant():
        return uniform_density(m, n)
    grid = CircleGrid(n)
    x = grid.nodes
    f = m.coupling(x)
    rho = m.rho
    h = spectral_cumulative_integral(2.0 * rho / f**2, closed=True)
    H = h[-1]
    kappa = H / TWO_PI
    if method == "periodic":
        return _finish(grid, *_periodic_form(m, grid, f, h), NoiseCase.NON_VANISHING, m)
    if method != "superposition":
        raise InvalidInput(f"unknown method {method!r}")
    # for large 2 rho int 1/f^2 the e^{-h} factor overflows; that surfaces
    # as an infinite condition number below
    with np.errstate(over="ignore", invalid="ignore"):
        h_per = h[:-1] - kappa * x
        v = damped_antiderivative(np.exp(-h_per) / f, kappa)

        # Basis solutions scaled by e^{-H} so the growing one ends at O(1): the (1, 0)
        # solution is f0 e^{h-H}/f, the (0, 1) one e^{h-H} Q/f (carrying C = e^{-H}).
        f0 = f[0]
        growth = np.exp(h[:-1] - H)
        Q = np.exp(-kappa * x) * v - v[0]
        Q_end = math.exp(-H) * v[0] - v[0]
        pa = f0 * growth / f
        pb = growth * Q / f
        M = np.array([
            [1.0 - math.exp(-H), Q_end / f0],
            [periodic_integral(pa), periodic_integral(pb)],
        ])
    cond = _equilibrated_cond(M)
    if cond > COND_LIMIT:
        raise IllConditioned(
            f"periodicity/normalization system has condition number {cond:.3e} > {COND_LIMIT:.0e}; "
            "try method='periodic'"
        )
    alpha, beta = np.linalg.solve(M, [0.0, 1.0])
    p = alpha * pa + beta * pb
    return _finish(grid, p, beta * math.exp(-H), NoiseCase.NON_VANISHING, m)


_GAUSS = np.polynomial.legendre.leggauss(8)


def _periodic_form(m: OscillatorModel, grid: CircleGrid, f: np.ndarray, h: np.ndarray):
    """Periodic solution through q = f p, which obeys q' = a q + C/f, a = 2 rho/f^2 > 0.

    Forward in phase the kernel decays, so with C = -1
        q(x_j) = int_{x_j}^{x_j+1} e^{-(h(s)-h_j)}/f(s) ds + e^{-(h_{j+1}-h_j)} q(x_{j+1}),
    closed around the circle by q_n = q_0.  All exponents are <= 0.  The
    cell integrals use 8-point Gauss-Legendre with h from its spectral
    interpolant.
    """
    n, dx, x = grid.n, grid.h, grid.nodes
    H = h[-1]
    kappa = H / TWO_PI
    h_per = h[:-1] - kappa * x
    cell = np.zeros(n)
    for t, w in zip(*_GAUSS):
        s = 0.5 * (t + 1.0) * dx
        hs = spectral_shift(h_per, s) + kappa * (x + s)
        cell += 0.5 * w * dx * np.exp(-(hs - h[:-1])) / m.coupling(x + s)
    decay = np.exp(-np.diff(h))
    # q_j = S_j + e^{-(H - h_j)} q_0 with S from the recursion started at q_n = 0
    S = np.empty(n)
    acc = 0.0
    for j in range(n - 1, -1, -1):
        acc = cell[j] + decay[j] * acc
        S[j] = acc
    q0 = S[0] / (1.0 - math.exp(-H))
    q = S + np.exp(-(H - h[:-1])) * q0
    p = q / f
    mass = periodic_integral(p)
    return p / mass, -1.0 / mass


def _series(z: float, m: OscillatorModel, pz: float):
    """Third-order expansion of p about a zero z of f.

    Differentiating the first-order relation repeatedly at f(z) = 0:
        p1 = f1^2 p0 / (2 rho)
        p2 = f1 (4 f1 p1 + 3 f2 p0) / (2 rho)
        p3 = (9 f1^2 p2 + 15 f1 f2 p1 + (4 f1 f3 + 3 f2^2) p0) / (2 rho)
    with pk, fk the k-th derivatives at z.
    """
    rho2 = 2.0 * m.rho
    f1 = float(m.d1(z))
    f2 = float(m.d2(z))
    f3 = float(m.d2.derivative()(z))
    p1 = f1 * f1 * pz / rho2
    p2 = f1 * (4.0 * f1 * p1 + 3.0 * f2 * pz) / rho2
    p3 = (9.0 * f1 * f1 * p2 + 15.0 * f1 * f2 * p1 + (4.0 * f1 * f3 + 3.0 * f2 * f2) * pz) / rho2
    return lambda dx: pz + dx * (p1 + dx * (0.5 * p2 + dx * p3 / 6.0))


def solve_density_vanishing(m: OscillatorModel, n: int = DEFAULT_N,
                            matching_rtol: float = MATCHING_RTOL) -> DensityGrid:
    """Stationary density when f has simple zeros.

    The relation is jointly linear in (p, C), so C = -1 is fixed first and
    every zero carries p(z) = 1/(2 rho).  Between consecutive zeros a < b the
    ODE is only stable integrated towards decreasing phase: approached from
    the left of b its homogeneous solution blows up like exp(2 rho/(f'^2 |x|)),
    which pins the bounded solution, while near a it is flat and carries no
    information.  Each interval is therefore solved from b - delta to the
    midpoint and then on to a + delta (stiff implicit stepper), and the
    arrival at a + delta is matched against the boundary expansion at a.
    Nodes within delta of a zero take the expansion directly.  Finally
    (p, C) is rescaled to unit mass.
    """
    rep = check_genericity(m)
    zs = rep.zero_set
    if zs.identically_zero or not len(zs):
        raise InvalidInput("coupling has no isolated zeros; use solve_density_nonvanishing")
    if not rep.h2_holds:
        raise NonTransversalZero(f"zero with slope {rep.min_abs_slope:.3e}: boundary expansion invalid")

    grid = CircleGrid(n)
    x = grid.nodes
    rho = m.rho
    C = -1.0
    pz = -C / (2.0 * rho)
    delta = BOUNDARY_OFFSET_CELLS * grid.h
    zeros = list(zs.phis)
    series = {i: _series(z, m, pz) for i, z in enumerate(zeros)}
    p = np.full(n, np.nan)

    f_, df_ = m.coupling, m.d1

    def rhs(t, y):
        ft = f_(t)
        return ((2.0 * rho - df_(t) * ft) * y + C) / (ft * ft)

    def jac(t, y):
        ft = f_(t)
        return np.array([[(2.0 * rho - df_(t) * ft) / (ft * ft)]])

    eps = 1e-9 * grid.h
    for i, a in enumerate(zeros):
        j = (i + 1) % len(zeros)
        b = zeros[j] + (TWO_PI if j == 0 else 0.0)
        if b - a < 4 * delta:
            raise InvalidInput(f"zeros {a:.6f}, {b:.6f} closer than the grid resolves; increase n")
        lifted = np.where(x < a - eps, x + TWO_PI, x)
        inside = (lifted > a - eps) & (lifted < b + eps)
        near_a = inside & (lifted - a <= delta + eps)
        near_b = inside & (b - lifted <= delta + eps) & ~near_a
        p[near_a] = series[i](lifted[near_a] - a)
        p[near_b] = series[j](lifted[near_b] - b)

        mid = 0.5 * (a + b)
        interior = inside & ~near_a & ~near_b
        upper = np.nonzero(interior & (lifted >= mid))[0]
        lower = np.nonzero(interior & (lifted < mid))[0]
        upper = upper[np.argsort(-lifted[upper])]
        lower = lower[np.argsort(-lifted[lower])]

        opts = dict(method="Radau", rtol=IVP_RTOL, atol=IVP_ATOL, jac=jac)
        t1 = lifted[upper]
        add_mid = t1.size == 0 or t1[-1] != mid
        if add_mid:
            t1 = np.append(t1, mid)
        leg1 = solve_ivp(rhs, (b - delta, mid), [series[j](-delta)], t_eval=t1, **opts)
        if not leg1.success:
            raise MidpointMismatch(f"interval ({a:.6f}, {b:.6f}): stepper failed: {leg1.message}")
        leg2 = solve_ivp(rhs, (mid, a + delta), [leg1.y[0, -1]],
                         t_eval=np.append(lifted[lower], a + delta), **opts)
        if not leg2.success:
            raise MidpointMismatch(f"interval ({a:.6f}, {b:.6f}): stepper failed: {leg2.message}")
        p[upper] = leg1.y[0, :-1] if add_mid else leg1.y[0]
        p[lower] = leg2.y[0, :-1]
        arrival = leg2.y[0, -1]
        expected = series[i](delta)
        mismatch = abs(arrival - expected) / abs(expected)
        if mismatch > matching_rtol:
            raise MidpointMismatch(
                f"interval ({a:.6f}, {b:.6f}): legs miss the boundary expansion by {mismatch:.3e} relative; "
                "increase n or tighten the stepper"
            )

    for z in zeros:
        p[np.abs(((x - z + np.pi) % TWO_PI) - np.pi) < eps] = pz
    if np.any(np.isnan(p)):
        raise MidpointMismatch("density left undefined at some nodes")
    mass = periodic_integral(p)
    return _finish(grid, p / mass, C / mass, NoiseCase.VANISHING, m, zeros)


def solve_density(m: OscillatorModel, n: int = DEFAULT_N) -> DensityGrid:
    """Dispatch on the zero set: constant, non-vanishing or vanishing case."""
    if m.coupling.is_constant():
        return uniform_density(m, n)
    zs = find_zeros(m)
    if len(zs):
        return solve_density_vanishing(m, n)
    # the periodic form keeps full accuracy where the superposition system
    # is already losing digits to cancellation
    return solve_density_nonvanishing(m, n, method="periodic")


def fp_residual(d: DensityGrid, m: OscillatorModel) -> float:
    """max |f^2 p' - (2 rho - f'f) p - C| over nodes more than 4h from any zero.

    p' is the fourth-order central difference on the grid.
    """
    grid = d.grid
    x = grid.nodes
    f = m.coupling(x)
    dp = central_diff4(d.p, grid.h)
    r = f * f * dp - (2.0 * m.rho - m.d1(x) * f) * d.p - d.C
    keep = grid.distance_to(d.zeros) > BOUNDARY_OFFSET_CELLS * grid.h * (1 + 1e-9)
    return float(np.max(np.abs(r[keep]))) if keep.any() else 0.0


def with_residual(d: DensityGrid, m: OscillatorModel) -> DensityGrid:
    return replace(d, residual=fp_residual(d, m))


def empirical_density(
    m: OscillatorModel,
    seed: int = 0,
    total_time: float = 1e4,
    burn_in: float = 100.0,
    bins: int = 256,
    dt: float = 1e-3,
    stream_id: int = 0,
    x0: float = 0.0,
    scheme: str = "heun",
) -> EmpiricalDensity:
    """Occupation histogram of one long path after discarding [0, burn_in]."""
    if not (total_time > burn_in > 0):
        raise InvalidTimes(f"need total_time > burn_in > 0, got {total_time}, {burn_in}")
    if not (0 < dt <= 1e-2):
        raise InvalidTimes(f"dt must lie in (0, 1e-2], got {dt}")
    if bins < 1:
        raise InvalidInput("bins must be positive")
    from . import _kernels as kern

    stream = dynamics.NoiseStream(seed, dt, stream_id)
    cm = dynamics._CompiledModel(m)
    code = dynamics._scheme_code(scheme)
    n_burn = int(round(burn_in / dt))
    n_total = int(round(total_time / dt))
    phi = dynamics.final_state(m, stream, [x0], 0, n_burn, scheme)[0]
    counts = np.zeros(bins, dtype=np.int64)
    for s, c in dynamics._chunks(n_burn, n_total - n_burn):
        phi = kern.advance_histogram(cm.f, cm.df, cm.K, cm.rho, code, phi, stream.increments(s, c), dt, counts)
    total = int(counts.sum())
    estimate = counts / (total * (TWO_PI / bins))
    return EmpiricalDensity(bins, counts, estimate, total, float(burn_in))


def bin_average(d: DensityGrid, bins: int) -> np.ndarray:
    """Average of the solved density over each histogram bin.

    Uses the trigonometric interpolant through the grid values, integrated
    exactly over the bin edges.
    """
    n = d.grid.n
    edges = TWO_PI * np.arange(bins + 1) / bins
    c = np.fft.fft(d.p)
    k = np.fft.fftfreq(n, d=1.0 / n)
    mean = c[0].real / n
    coef = np.where(k != 0, c / np.where(k != 0, 1j * k, 1.0), 0.0) / n
    if n % 2 == 0:
        coef[n // 2] = 0.0
    P = np.real(np.exp(1j * np.outer(edges, k)) @ coef)
    Fe = mean * edges + P - P[0]
    return np.diff(Fe) / (TWO_PI / bins)


def l1_distance(d: DensityGrid, emp: EmpiricalDensity) -> float:
    """L1 distance between the solved density (bin-averaged) and a histogram."""
    ref = bin_average(d, emp.bins)
    return float(np.sum(np.abs(ref - emp.estimate)) * (TWO_PI / emp.bins))
