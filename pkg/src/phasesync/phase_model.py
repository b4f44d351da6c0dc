"""Oscillator definition: Fourier-series noise coupling, zero set, genericity.

The model is the Stratonovich phase equation

    dphi = rho dt + sigma * f(phi) o dW   (mod 2 pi)

with f a truncated Fourier series, so f', f'' are exact and periodic.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, DegreeTooHigh

TWO_PI = 2.0 * math.pi

ZERO_TOL = 1e-10
TRANSVERSALITY_RTOL = 1e-6
COEFF_TOL = 1e-12


@dataclass(frozen=True)
class FourierFunction:
    """g(phi) = a0 + sum_k a_k cos(k phi) + b_k sin(k phi), k = 1..K."""

    a0: float = 0.0
    a: tuple[float, ...] = ()
    b: tuple[float, ...] = ()

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        b = tuple(float(x) for x in self.b)
        K = max(len(a), len(b))
        a += (0.0,) * (K - len(a))
        b += (0.0,) * (K - len(b))
        object.__setattr__(self, "a0", float(self.a0))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def K(self) -> int:
        return len(self.a)

    @classmethod
    def constant(cls, c: float) -> "FourierFunction":
        return cls(c)

    @classmethod
    def sine(cls, k: int = 1, amplitude: float = 1.0) -> "FourierFunction":
        b = [0.0] * k
        b[k - 1] = amplitude
        return cls(0.0, [0.0] * k, b)

    @classmethod
    def cosine(cls, k: int = 1, amplitude: float = 1.0) -> "FourierFunction":
        a = [0.0] * k
        a[k - 1] = amplitude
        return cls(0.0, a, [0.0] * k)

    def __call__(self, phi):
        phi = np.asarray(phi, dtype=float)
        out = np.full(phi.shape, self.a0)
        for k, (ak, bk) in enumerate(zip(self.a, self.b), start=1):
            if ak:
                out = out + ak * np.cos(k * phi)
            if bk:
                out = out + bk * np.sin(k * phi)
        return out if out.ndim else float(out)

    def derivative(self) -> "FourierFunction":
        ks = range(1, self.K + 1)
        return FourierFunction(
            0.0,
            [k * bk for k, bk in zip(ks, self.b)],
            [-k * ak for k, ak in zip(ks, self.a)],
        )

    def scaled(self, s: float) -> "FourierFunction":
        return FourierFunction(s * self.a0, [s * x for x in self.a], [s * x for x in self.b])

    def __add__(self, other: "FourierFunction") -> "FourierFunction":
        K = max(self.K, other.K)
        pad = lambda v: list(v) + [0.0] * (K - len(v))  # noqa: E731
        return FourierFunction(
            self.a0 + other.a0,
            [x + y for x, y in zip(pad(self.a), pad(other.a))],
            [x + y for x, y in zip(pad(self.b), pad(other.b))],
        )

    def coefficient_array(self) -> np.ndarray:
        """Packed (a0, a_1..a_K, b_1..b_K) used by the compiled kernels."""
        return np.array((self.a0,) + self.a + self.b, dtype=float)

    def is_constant(self, tol: float = COEFF_TOL) -> bool:
        return all(abs(x) <= tol for x in self.a + self.b)

    def is_zero(self, tol: float = COEFF_TOL) -> bool:
        return abs(self.a0) <= tol and self.is_constant(tol)


def evaluate(g: FourierFunction, phi):
    """Evaluate ``g`` at ``phi`` (reduced mod 2 pi first)."""
    return g(np.mod(phi, TWO_PI))


def derivative(g: FourierFunction) -> FourierFunction:
    return g.derivative()


@dataclass(frozen=True)
class OscillatorModel:
    rho: float
    f: FourierFunction
    sigma: float = 1.0

    def __post_init__(self):
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise ConfigError(f"rho must be a finite positive number, got {self.rho!r}")
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ConfigError(f"sigma must be finite and >= 0, got {self.sigma!r}")

    @cached_property
    def coupling(self) -> FourierFunction:
        """Effective noise coupling sigma * f."""
        return self.f.scaled(self.sigma)

    @cached_property
    def d1(self) -> FourierFunction:
        return self.coupling.derivative()

    @cached_property
    def d2(self) -> FourierFunction:
        return self.d1.derivative()

    def with_sigma(self, sigma: float) -> "OscillatorModel":
        return OscillatorModel(self.rho, self.f, sigma)

    def with_rho(self, rho: float) -> "OscillatorModel":
        return OscillatorModel(rho, self.f, self.sigma)


def ito_drift(m: OscillatorModel, phi):
    """rho + f'(phi) f(phi) / 2 for the effective coupling."""
    return m.rho + 0.5 * m.d1(phi) * m.coupling(phi)


class NoiseCase(str, enum.Enum):
    NON_VANISHING = "NonVanishing"
    VANISHING = "Vanishing"


@dataclass(frozen=True)
class Zero:
    phi: float
    slope: float


@dataclass(frozen=True)
class ZeroSet:
    zeros: tuple[Zero, ...]
    classification: NoiseCase
    # f == 0 everywhere: the zero set is the whole circle, not a finite list.
    identically_zero: bool = False

    @property
    def phis(self) -> np.ndarray:
        return np.array([z.phi for z in self.zeros])

    def __len__(self) -> int:
        return len(self.zeros)


@dataclass(frozen=True)
class GenericityReport:
    h1_holds: bool
    h2_holds: bool
    zero_set: ZeroSet
    min_abs_slope: float

    @property
    def generic(self) -> bool:
        return self.h1_holds and self.h2_holds

    @property
    def case(self) -> NoiseCase:
        return self.zero_set.classification


def default_grid_n(g: FourierFunction) -> int:
    return max(1024, 16 * g.K)


def _bisect(g: FourierFunction, lo: float, hi: float, glo: float, tol: float = 1e-13) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if gm == 0.0:
            return mid
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _newton_polish(g: FourierFunction, dg: FourierFunction, x: float, lo: float, hi: float) -> float:
    for _ in range(3):
        s = dg(x)
        if s == 0.0:
            break
        step = g(x) / s
        xn = x - step
        if not (lo - 1e-12 <= xn <= hi + 1e-12) or abs(g(xn)) > abs(g(x)):
            break
        x = xn
        if step == 0.0:
            break
    return x


def _tangential_candidate(g, dg, lo: float, hi: float):
    """Locate an extremum of g in [lo, hi] via a sign change of g'."""
    dlo, dhi = dg(lo), dg(hi)
    if dlo == 0.0:
        return lo
    if dhi == 0.0:
        return hi
    if (dlo > 0) == (dhi > 0):
        return None
    ddg = dg.derivative()
    x = _bisect(dg, lo, hi, dlo)
    return _newton_polish(dg, ddg, x, lo, hi)


def find_zeros(m: OscillatorModel, grid_n: int | None = None, zero_tol: float = ZERO_TOL) -> ZeroSet:
    """All zeros of the effective coupling on [0, 2 pi), with slopes.

    Simple roots come from grid sign changes refined by bisection and Newton.
    Double (tangential) roots show no sign change; they are caught as local
    minima of |f| whose extremum value is below ``zero_tol``.
    """
    g, dg = m.coupling, m.d1
    if g.is_zero():
        return ZeroSet((), NoiseCase.VANISHING, identically_zero=True)
    if grid_n is None:
        grid_n = default_grid_n(g)
    if grid_n < 4 * g.K:
        raise DegreeTooHigh(f"grid_n={grid_n} < 4K={4 * g.K}: sign changes could be missed")

    x = TWO_PI * np.arange(grid_n + 1) / grid_n
    v = g(x)
    v[-1] = v[0]
    roots: list[float] = []
    for j in range(grid_n):
        lo, hi, vlo, vhi = x[j], x[j + 1], v[j], v[j + 1]
        if vlo == 0.0:
            roots.append(lo)
        elif vlo * vhi < 0:
            r = _bisect(g, lo, hi, vlo)
            roots.append(_newton_polish(g, dg, r, lo, hi))

    absv = np.abs(v[:-1])
    prev, nxt = np.roll(absv, 1), np.roll(absv, -1)
    sv = np.sign(v[:-1])
    no_change = (sv == np.roll(sv, 1)) & (sv == np.roll(sv, -1))
    cand = np.nonzero((absv <= prev) & (absv <= nxt) & no_change & (absv > 0))[0]
    for j in cand:
        if absv[j] > 1e3 * max(zero_tol, 1e-300) and absv[j] > 1e-3 * np.max(absv):
            continue
        xe = _tangential_candidate(g, dg, x[j] - x[1], x[j] + x[1])
        if xe is not None and abs(g(xe)) < zero_tol:
            roots.append(xe)

    roots = sorted(float(np.mod(r, TWO_PI)) for r in roots)
    merged: list[float] = []
    for r in roots:
        if merged and r - merged[-1] < 1e-9:
            continue
        merged.append(r)
    if len(merged) > 1 and merged[0] + TWO_PI - merged[-1] < 1e-9:
        merged.pop()
    zeros = tuple(Zero(r, float(dg(r))) for r in merged)
    case = NoiseCase.VANISHING if zeros else NoiseCase.NON_VANISHING
    return ZeroSet(zeros, case)


def check_genericity(m: OscillatorModel, grid_n: int | None = None) -> GenericityReport:
    g, dg = m.coupling, m.d1
    zs = find_zeros(m, grid_n)
    h1 = not g.is_constant()
    if zs.identically_zero:
        return GenericityReport(h1, False, zs, 0.0)
    min_slope = min((abs(z.slope) for z in zs.zeros), default=math.inf)
    n = grid_n or default_grid_n(g)
    scale = float(np.max(np.abs(dg(TWO_PI * np.arange(n) / n))))
    h2 = min_slope > TRANSVERSALITY_RTOL * scale
    return GenericityReport(h1, h2, zs, min_slope)


# --------------------------------------------------------------------------
# model file I/O

def model_to_dict(m: OscillatorModel) -> dict:
    return {
        "rho": m.rho,
        "sigma": m.sigma,
        "f": {"a0": m.f.a0, "a": list(m.f.a), "b": list(m.f.b)},
    }


def model_from_dict(d: dict) -> OscillatorModel:
    try:
        fd = d["f"]
        f = FourierFunction(fd.get("a0", 0.0), fd.get("a", []), fd.get("b", []))
        return OscillatorModel(float(d["rho"]), f, float(d.get("sigma", 1.0)))
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(f"invalid model definition: {exc!r}") from exc


def load_model(path: str | Path) -> OscillatorModel:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read model file {path}: {exc}") from exc
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: top-level JSON value must be an object")
    return model_from_dict(d)


def save_model(m: OscillatorModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(m), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def fourier(a0: float = 0.0, a: Sequence[float] = (), b: Sequence[float] = ()) -> FourierFunction:
    return FourierFunction(a0, tuple(a), tuple(b))
