"""Compiled inner loops for long SDE runs.

Coefficients are packed as (a0, a_1..a_K, b_1..b_K).  Every kernel releases
the GIL so independent paths can run on worker threads.
"""

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi

HEUN = 0
ITO_EM = 1


@njit(cache=True, nogil=True, fastmath=False)
def series(c, K, phi):
    s = c[0]
    for k in range(1, K + 1):
        s += c[k] * math.cos(k * phi) + c[K + k] * math.sin(k * phi)
    return s


@njit(cache=True, nogil=True)
def wrap(x):
    r = x % TWO_PI
    if r >= TWO_PI:
        r -= TWO_PI
    return r


@njit(cache=True, nogil=True)
def step(f, df, K, rho, scheme, phi, dW, dt):
    fp = series(f, K, phi)
    if scheme == HEUN:
        pred = phi + rho * dt + fp * dW
        fq = series(f, K, pred)
        return wrap(phi + rho * dt + 0.5 * (fp + fq) * dW)
    drift = rho + 0.5 * series(df, K, phi) * fp
    return wrap(phi + drift * dt + fp * dW)


@njit(cache=True, nogil=True)
def advance(f, df, K, rho, scheme, phi, dW, dt, stride, offset, out):
    """Advance one phase through ``dW``.

    Step i of this call is global step ``offset + i``; the state after every
    global step divisible by ``stride`` goes to ``out``.  Returns the final
    phase and the number of states written.
    """
    j = 0
    for i in range(dW.shape[0]):
        phi = step(f, df, K, rho, scheme, phi, dW[i], dt)
        if (offset + i + 1) % stride == 0:
            out[j] = phi
            j += 1
    return phi, j


@njit(cache=True, nogil=True)
def advance_common(f, df, K, rho, scheme, phis, dW, dt):
    """All members in ``phis`` (in place) driven by the same increments."""
    for i in range(dW.shape[0]):
        w = dW[i]
        for m in range(phis.shape[0]):
            phis[m] = step(f, df, K, rho, scheme, phis[m], w, dt)


@njit(cache=True, nogil=True)
def advance_histogram(f, df, K, rho, scheme, phi, dW, dt, counts):
    nb = counts.shape[0]
    scale = nb / TWO_PI
    for i in range(dW.shape[0]):
        phi = step(f, df, K, rho, scheme, phi, dW[i], dt)
        b = int(phi * scale)
        if b >= nb:
            b = nb - 1
        counts[b] += 1
    return phi


@njit(cache=True, nogil=True)
def advance_linearized(f, df, ddf, K, rho, phi, r, dW, dt):
    """Heun phase step plus Euler-Maruyama on dr = f''f/2 dt + f' dW.

    Both use the pre-step phase and the same increment.
    """
    for i in range(dW.shape[0]):
        w = dW[i]
        fp = series(f, K, phi)
        r += 0.5 * series(ddf, K, phi) * fp * dt + series(df, K, phi) * w
        pred = phi + rho * dt + fp * w
        fq = series(f, K, pred)
        phi = wrap(phi + rho * dt + 0.5 * (fp + fq) * w)
    return phi, r


def packed(g, K):
    c = np.zeros(1 + 2 * K)
    c[0] = g.a0
    c[1 : 1 + g.K] = g.a
    c[1 + K : 1 + K + g.K] = g.b
    return c
