import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from phasesync.errors import EmptyGrid
from phasesync.numerics import (
    CircleGrid, central_diff4, cumulative_integral, damped_antiderivative, periodic_integral,
    spectral_cumulative_integral,
)


def test_empty_grid():
    with pytest.raises(EmptyGrid):
        CircleGrid(1)
    with pytest.raises(EmptyGrid):
        periodic_integral([1.0])


def test_periodic_integral_examples():
    x = CircleGrid(64).nodes
    assert periodic_integral(np.ones(64)) == pytest.approx(2 * math.pi, rel=1e-15)
    assert abs(periodic_integral(np.sin(x) ** 2) - math.pi) < 1e-12
    # oracle: the same rule on a much finer grid
    ref = periodic_integral(np.exp(np.cos(CircleGrid(2**16).nodes)))
    assert periodic_integral(np.exp(np.cos(CircleGrid(256).nodes))) == pytest.approx(ref, abs=1e-13)
    assert ref == pytest.approx(7.95492652101284, abs=1e-12)


def test_cumulative_examples():
    g = CircleGrid(256)
    x = g.nodes
    assert np.allclose(cumulative_integral(np.ones(256)), x, atol=1e-13)
    assert np.max(np.abs(cumulative_integral(np.cos(x)) - np.sin(x))) < 1e-3
    assert not np.any(cumulative_integral(np.zeros(256)))
    closed = cumulative_integral(np.cos(x) + 1, closed=True)
    assert closed.size == 257 and closed[-1] == pytest.approx(2 * math.pi)


def test_spectral_cumulative_is_exact_for_trig():
    x = CircleGrid(128).nodes
    F = spectral_cumulative_integral(2 + np.cos(3 * x))
    assert np.allclose(F, 2 * x + np.sin(3 * x) / 3, atol=1e-13)


@given(st.floats(0.1, 20), st.integers(1, 5))
def test_damped_antiderivative_solves_ode(kappa, k):
    g = CircleGrid(256)
    x = g.nodes
    u = np.cos(k * x) + 0.3
    v = damped_antiderivative(u, kappa)
    exact = (k * np.sin(k * x) - kappa * np.cos(k * x)) / (kappa**2 + k**2) - 0.3 / kappa
    assert np.allclose(v, exact, atol=1e-12)


@given(st.integers(2, 7), st.integers(6, 10))
def test_quadrature_independent_of_n_for_low_degree(k, log_n):
    n = 2**log_n
    for m in (n, 2 * n):
        x = CircleGrid(m).nodes
        assert abs(periodic_integral(np.sin(k * x) ** 2) - math.pi) < 1e-12


def test_central_diff4_order():
    errs = []
    for n in (64, 128):
        g = CircleGrid(n)
        errs.append(np.max(np.abs(central_diff4(np.sin(g.nodes), g.h) - np.cos(g.nodes))))
    assert 14 < errs[0] / errs[1] < 18


def test_distance_to():
    g = CircleGrid(8)
    d = g.distance_to([0.0])
    assert d[0] == 0 and d[4] == pytest.approx(math.pi) and d[1] == pytest.approx(d[7])
