"""Uniform circle grid and periodic quadrature.

On a periodic grid the trapezoid rule reduces to the rectangle rule and is
spectrally accurate for smooth periodic integrands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import EmptyGrid

TWO_PI = 2.0 * math.pi
DEFAULT_N = 4096


@dataclass(frozen=True)
class CircleGrid:
    n: int = DEFAULT_N

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise EmptyGrid(f"circle grid needs n >= 2 points, got {self.n!r}")

    @property
    def h(self) -> float:
        return TWO_PI / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        nodes = TWO_PI * np.arange(self.n) / self.n
        nodes.flags.writeable = False
        return nodes

    def distance_to(self, points) -> np.ndarray:
        """Circle distance from every node to the nearest of ``points``."""
        pts = np.asarray(points, dtype=float).reshape(-1)
        if pts.size == 0:
            return np.full(self.n, np.inf)
        d = np.abs(self.nodes[:, None] - pts[None, :]) % TWO_PI
        return np.min(np.minimum(d, TWO_PI - d), axis=1)


def _as_values(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise EmptyGrid(f"need at least 2 samples on the circle, got shape {v.shape}")
    return v


def periodic_integral(values) -> float:
    v = _as_values(values)
    return float(TWO_PI / v.size * np.sum(v))


def cumulative_integral(values, closed: bool = False) -> np.ndarray:
    """Cumulative trapezoid F_j ~ int_0^{phi_j}, with F_0 = 0.

    The integrand is treated as periodic, so the virtual endpoint F_n equals
    ``periodic_integral(values)``; pass ``closed=True`` to append it.
    """
    v = _as_values(values)
    h = TWO_PI / v.size
    ext = np.append(v, v[0])
    F = np.concatenate(([0.0], np.cumsum(0.5 * h * (ext[1:] + ext[:-1]))))
    return F if closed else F[:-1]


def _wavenumbers(n: int) -> np.ndarray:
    return np.fft.fftfreq(n, d=1.0 / n)


def spectral_cumulative_integral(values, closed: bool = False) -> np.ndarray:
    """Cumulative integral of a periodic band-limited sample, exact to roundoff.

    Integrates the trigonometric interpolant: mean * phi plus the
    antiderivative of the zero-mean part.
    """
    v = _as_values(values)
    n = v.size
    c = np.fft.fft(v)
    k = _wavenumbers(n)
    mean = c[0].real / n
    d = np.zeros_like(c)
    nz = k != 0
    d[nz] = c[nz] / (1j * k[nz])
    if n % 2 == 0:
        d[n // 2] = 0.0
    P = np.fft.ifft(d).real
    nodes = TWO_PI * np.arange(n) / n
    F = mean * nodes + P - P[0]
    if closed:
        F = np.append(F, mean * TWO_PI)
    return F


def spectral_shift(values, s: float) -> np.ndarray:
    """Trigonometric interpolant of a periodic sample evaluated at nodes + s."""
    v = _as_values(values)
    n = v.size
    c = np.fft.fft(v) * np.exp(1j * _wavenumbers(n) * s)
    if n % 2 == 0:
        # Nyquist mode as a cosine, the real interpolant
        c[n // 2] = np.fft.fft(v)[n // 2].real * math.cos(n // 2 * s)
    return np.fft.ifft(c).real


def damped_antiderivative(values, kappa: float) -> np.ndarray:
    """Periodic v with v' - kappa v = u for periodic samples u (kappa != 0).

    Then int_0^phi e^{-kappa s} u(s) ds = e^{-kappa phi} v(phi) - v(0).
    """
    u = _as_values(values)
    n = u.size
    c = np.fft.fft(u)
    k = _wavenumbers(n)
    d = c / (1j * k - kappa)
    if n % 2 == 0:
        # Nyquist mode: treat as the real cos mode it represents
        d[n // 2] = c[n // 2] * (-kappa) / (kappa**2 + (n // 2) ** 2)
    return np.fft.ifft(d).real


def central_diff4(values, h: float) -> np.ndarray:
    """Fourth-order central difference of periodic samples."""
    v = np.asarray(values, dtype=float)
    return (
        -np.roll(v, -2) + 8.0 * np.roll(v, -1) - 8.0 * np.roll(v, 1) + np.roll(v, 2)
    ) / (12.0 * h)
