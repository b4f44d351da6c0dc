import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import ks_2samp

from phasesync import corpus
from phasesync import dynamics as dyn
from phasesync.errors import DepthExceedsBuffer, InvalidHorizon, InvalidInput
from phasesync.phase_model import FourierFunction, OscillatorModel

STD = corpus.standard_model()
SIN = OscillatorModel(1.0, FourierFunction.sine(1))
CONST = OscillatorModel(1.0, FourierFunction.constant(0.7))
ROTATION = OscillatorModel(1.0, FourierFunction.sine(1), 0.0)

angles = st.floats(-100, 100, allow_nan=False)


@given(angles)
def test_wrap_range(x):
    w = dyn.wrap(x)
    assert 0.0 <= w < 2 * math.pi
    assert math.isclose(math.cos(w), math.cos(x), abs_tol=1e-9)


def test_wrap_edge_cases():
    assert dyn.wrap(-1e-18) < 2 * math.pi
    assert dyn.wrap(2 * math.pi) == 0.0
    assert dyn.wrap(-0.0) == 0.0


@given(angles, angles)
def test_circle_distance(x, y):
    d = dyn.circle_distance(x, y)
    assert d == dyn.circle_distance(y, x)
    assert 0.0 <= d <= math.pi + 1e-12


def test_order_parameter():
    assert dyn.order_parameter([1.0, 1.0, 1.0]) == pytest.approx(1.0)
    assert dyn.order_parameter(2 * np.pi * np.arange(8) / 8) < 1e-15


def test_step_examples():
    assert dyn.step_heun(ROTATION, 0.0, 0.3, 0.1) == pytest.approx(0.1, abs=1e-15)
    phi, dW, dt = 1.0, 0.2, 0.01
    expect = dyn.wrap(phi + dt + 0.7 * dW)
    assert dyn.step_heun(CONST, phi, dW, dt) == pytest.approx(expect, abs=1e-15)
    assert dyn.step_ito_em(CONST, phi, dW, dt) == dyn.step_heun(CONST, phi, dW, dt)
    assert dyn.step_ito_em(SIN, math.pi / 2, 0.1, 0.01) == pytest.approx(math.pi / 2 + 0.11, abs=1e-15)


def test_kernel_matches_numpy_steps():
    s = dyn.NoiseStream(2)
    dW = s.increments(0, 300)
    for scheme, step in (("heun", dyn.step_heun), ("ito_em", dyn.step_ito_em)):
        phi = 0.4
        for w in dW:
            phi = step(STD, phi, w, s.dt)
        rec = dyn.simulate_path(STD, s, 0.4, 0.3, scheme=scheme)
        assert rec.phases[-1] == pytest.approx(phi, abs=1e-12)


def test_noise_addressing():
    s = dyn.NoiseStream(11, 0.01)
    full = s.increments(0, 1001)
    for a, c in [(0, 1), (1, 5), (7, 100), (998, 3)]:
        assert np.array_equal(s.increments(a, c), full[a:a + c])
    assert not np.array_equal(s.substream(1).increments(0, 10), full[:10])
    z = dyn.NoiseStream(0, 1.0).increments(0, 200000)
    assert abs(z.mean()) < 0.01 and abs(z.var() - 1) < 0.01


def test_noise_stream_validation():
    with pytest.raises(InvalidInput):
        dyn.NoiseStream(0, 0.0)
    with pytest.raises(InvalidInput):
        dyn.NoiseStream(-1)


def test_cocycle():
    s = dyn.NoiseStream(5)
    whole = dyn.simulate_path(STD, s, 2.0, 3.0)
    head = dyn.simulate_path(STD, s, 2.0, 1.0)
    tail = dyn.simulate_path(STD, s, head.phases[-1], 2.0, start_step=1000)
    assert np.array_equal(whole.phases[1000:], tail.phases)
    assert np.allclose(tail.times, whole.times[1000:])


def test_path_record_shape_and_stride():
    rec = dyn.simulate_path(STD, dyn.NoiseStream(0), 1.0, 1.0, record_stride=100)
    assert rec.times.shape == rec.phases.shape == (11,)
    full = dyn.simulate_path(STD, dyn.NoiseStream(0), 1.0, 1.0)
    assert np.array_equal(full.phases[::100], rec.phases)


def test_zero_noise_is_rotation():
    rec = dyn.simulate_path(ROTATION, dyn.NoiseStream(0), 1.0, 5.0, record_stride=50)
    assert np.allclose(rec.phases, dyn.wrap(1.0 + rec.times), atol=1e-10)


def test_same_start_same_path():
    s = dyn.NoiseStream(1)
    a = dyn.simulate_path(STD, s, 1.0, 2.0)
    b = dyn.simulate_path(STD, s, 1.0, 2.0)
    assert np.array_equal(a.phases, b.phases)


def test_invalid_horizon():
    with pytest.raises(InvalidHorizon):
        dyn.simulate_path(STD, dyn.NoiseStream(0), 0.0, -1.0)


def test_strong_order():
    dts = [2.0**-k for k in range(4, 9)]
    err = dyn.strong_errors(STD, dts, n_paths=500)
    q = np.polyfit(np.log(dts), np.log(err), 1)[0]
    assert 0.75 <= q <= 1.25


def _endpoints(scheme, n_paths=100_000, horizon=1.0, dt=1e-2, seed=0):
    s = dyn.NoiseStream(seed, dt, 1 if scheme == "heun" else 2)
    step = dyn.step_heun if scheme == "heun" else dyn.step_ito_em
    phi = np.full(n_paths, 1.0)
    for k in range(int(round(horizon / dt))):
        phi = step(SIN, phi, s.increments(k * n_paths, n_paths), dt)
    return phi


def test_schemes_agree_in_distribution():
    assert ks_2samp(_endpoints("heun"), _endpoints("ito_em")).statistic < 0.02


def test_constant_coupling_keeps_distances():
    snaps = dyn.simulate_ensemble(CONST, dyn.NoiseStream(0), [0.1, 1.0, 2.5], 20.0, [0.0, 5.0, 20.0])
    for s in snaps:
        assert s.max_pairwise_dist == pytest.approx(2.4, abs=1e-9)


def test_ensemble_synchronizes():
    x0s = 2 * np.pi * np.arange(16) / 16
    snaps = dyn.simulate_ensemble(STD, dyn.NoiseStream(0), x0s, 500.0, [0.0, 250.0, 500.0])
    assert snaps[0].max_pairwise_dist > 2.0
    assert snaps[-1].max_pairwise_dist < 1e-6
    assert snaps[-1].order_parameter > 1 - 1e-10


def test_independent_control_does_not_contract():
    x0s = 2 * np.pi * np.arange(16) / 16
    for seed in range(5):
        snaps = dyn.simulate_ensemble(STD, dyn.NoiseStream(seed), x0s, 500.0, [500.0], independent=True)
        assert snaps[-1].max_pairwise_dist > 0.5


def test_independent_ensemble_thread_invariant():
    kw = dict(x0s=[0.0, 1.0, 2.0, 3.0], horizon=5.0, snapshot_times=[1.0, 5.0], independent=True)
    a = dyn.simulate_ensemble(STD, dyn.NoiseStream(3), workers=1, **kw)
    b = dyn.simulate_ensemble(STD, dyn.NoiseStream(3), workers=4, **kw)
    assert all(np.array_equal(x.phases, y.phases) for x, y in zip(a, b))


def test_ensemble_input_errors():
    with pytest.raises(InvalidInput):
        dyn.simulate_ensemble(STD, dyn.NoiseStream(0), [1.0], 1.0, [1.0])
    with pytest.raises(InvalidInput):
        dyn.simulate_ensemble(STD, dyn.NoiseStream(0), [1.0, 2.0], 1.0, [2.0])


X0S = [0.0, math.pi / 2, math.pi, 3 * math.pi / 2]


def test_pullback_standard_model():
    res = dyn.pullback(STD, dyn.NoiseStream(0), X0S, [50.0, 100.0, 200.0])
    assert [r["depth"] for r in res] == [50.0, 100.0, 200.0]
    spread = dyn.max_pairwise_distance(res[-1]["endpoints"])
    drift = float(np.max(dyn.circle_distance(np.array(res[-1]["endpoints"]), np.array(res[-2]["endpoints"]))))
    assert spread < 1e-8, f"spread at depth 200: {spread:.2e}"
    assert drift < 1e-6, f"drift between depths 100 and 200: {drift:.2e}"


def test_pullback_converges_at_depth_matched_to_rate():
    res = dyn.pullback(STD, dyn.NoiseStream(0), X0S, [100.0, 200.0, 400.0, 800.0])
    spreads = [dyn.max_pairwise_distance(r["endpoints"]) for r in res]
    assert spreads[-1] < 1e-8 and spreads[2] < spreads[0]
    drift = np.max(dyn.circle_distance(np.array(res[-1]["endpoints"]), np.array(res[-2]["endpoints"])))
    assert drift < 1e-6


def test_pullback_without_noise_is_rotation():
    res = dyn.pullback(ROTATION, dyn.NoiseStream(0), X0S, [1.0, 2.0])
    for r in res:
        assert np.allclose(r["endpoints"], dyn.wrap(np.array(X0S) + r["depth"]), atol=1e-10)


def test_pullback_deterministic_and_buffer():
    a = dyn.pullback(STD, dyn.NoiseStream(2), X0S, [5.0, 10.0])
    b = dyn.pullback(STD, dyn.NoiseStream(2), X0S, [5.0, 10.0])
    assert a == b
    with pytest.raises(DepthExceedsBuffer):
        dyn.pullback(STD, dyn.NoiseStream(2), X0S, [5.0, 10.0], t_max=8.0)
    with pytest.raises(InvalidInput):
        dyn.pullback(STD, dyn.NoiseStream(2), X0S, [10.0, 5.0])


def test_decay_slope_window():
    t = np.arange(0, 100, 0.1)
    fit = dyn.decay_slope(t, 0.05 * np.exp(-0.3 * t))
    assert fit[0] == pytest.approx(-0.3, rel=1e-10)
    assert dyn.decay_slope(t, np.full_like(t, 0.05)) is None
    assert dyn.decay_slope(t, np.full_like(t, 1.0)) is None
