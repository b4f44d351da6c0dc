"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line; they are printed together in the
"acceptance criteria" section at the end of the pytest run.
"""

import filecmp
import math
import time

import numpy as np
from conftest import ACCEPTANCE_LINES

from phasesync import corpus
from phasesync import density as dens
from phasesync import dynamics as dyn
from phasesync import lyapunov as lyap
from phasesync.cli import main
from phasesync.numerics import TWO_PI, periodic_integral
from phasesync.phase_model import FourierFunction, OscillatorModel, save_model

RHOS = (0.5, 1.0, 3.0)


def report(k: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {k:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES[k] = line
    print(line)
    assert ok, line


def test_01_negativity():
    t0 = time.perf_counter()
    worst = -math.inf
    for rho in RHOS:
        for name in corpus.GENERIC:
            m = corpus.models(rho)[name]
            worst = max(worst, lyap.lyapunov_quadrature(m, dens.solve_density(m)).value)
    elapsed = time.perf_counter() - t0
    report(1, "negativity", worst < -1e-10 and elapsed < 10,
           f"max lambda {worst:.4e} over 15 generic models, {elapsed:.1f} s")


def test_02_cross_method():
    t0 = time.perf_counter()
    flux = 0.0
    for rho in RHOS:
        for name in corpus.NON_VANISHING:
            m = corpus.models(rho)[name]
            d = dens.solve_density(m)
            flux = max(flux, abs(lyap.lyapunov_quadrature(m, d).value - lyap.lyapunov_flux_form(m, d).value))
    dt = 1e-3
    rows, ok_mc = [], True
    for name in corpus.GENERIC:
        m = corpus.models()[name]
        q = lyap.lyapunov_quadrature(m, dens.solve_density(m)).value
        mc = lyap.lyapunov_monte_carlo(m, seed=0, n_paths=64, horizon=2000.0, dt=dt)
        tol = 3 * mc.stderr + 5 * dt
        ok_mc &= abs(q - mc.value) < tol
        rows.append(f"{name} {abs(q - mc.value):.2e}/{tol:.2e}")
    elapsed = time.perf_counter() - t0
    report(2, "cross-method agreement", flux < 1e-8 and ok_mc and elapsed < 300,
           f"|quad-flux| max {flux:.1e}; |quad-MC|/tol: {', '.join(rows)}; {elapsed:.0f} s")


def test_03_small_noise():
    ratios = []
    for s in (0.05, 0.1, 0.2):
        m = OscillatorModel(1.0, FourierFunction.sine(1), s)
        ratios.append(lyap.lyapunov_quadrature(m, dens.solve_density(m)).value / s**2)
    ok = all(-0.2875 <= r <= -0.2125 for r in ratios)
    report(3, "small-noise asymptotic", ok, "lambda/sigma^2 = " + ", ".join(f"{r:.5f}" for r in ratios))


def test_04_density():
    t0 = time.perf_counter()
    worst_res, worst_bv = 0.0, 0.0
    for rho in RHOS:
        for name in ("constant",) + corpus.GENERIC:
            m = corpus.models(rho)[name]
            d = dens.solve_density(m)
            worst_res = max(worst_res, dens.fp_residual(d, m) / (2 * rho * np.max(d.p)))
            for z in d.zeros:
                k = int(round(z / d.grid.h)) % d.grid.n
                worst_bv = max(worst_bv, abs(d.p[k] + d.C / (2 * rho)) / np.max(d.p))
    l1 = {}
    for name in ("2+sin", "1.5*sin"):
        m = corpus.models()[name]
        emp = dens.empirical_density(m, seed=0, total_time=1e4 + 100.0, burn_in=100.0, bins=256)
        assert emp.total_samples == 10**7
        l1[name] = dens.l1_distance(dens.solve_density(m), emp)
    elapsed = time.perf_counter() - t0
    ok = worst_res < 1e-6 and max(l1.values()) < 0.03 and worst_bv < 1e-6 and elapsed < 180
    report(4, "density correctness", ok,
           f"relative residual {worst_res:.1e}, boundary {worst_bv:.1e}, "
           f"L1 {', '.join(f'{k} {v:.4f}' for k, v in l1.items())}; {elapsed:.0f} s")


def test_05_holder():
    margins = []
    for rho in RHOS:
        m = corpus.models(rho)["2+sin"]
        d = dens.solve_density(m)
        g = 1.0 / m.coupling(d.phi) ** 2
        G = periodic_integral(g)
        margins.append((periodic_integral(g * d.p) * periodic_integral(g / d.p) - G**2) / G**2)
    report(5, "strict Holder inequality", min(margins) > 1e-10,
           "relative gap " + ", ".join(f"{v:.3e}" for v in margins))


def test_06_intervals():
    worst_I, worst_sum = -math.inf, 0.0
    for rho in RHOS:
        for name in corpus.VANISHING_GENERIC:
            m = corpus.models(rho)[name]
            ic = lyap.interval_contributions(m, dens.solve_density(m))
            worst_I = max([worst_I] + [iv.I for iv in ic.intervals])
            worst_sum = max(worst_sum, ic.sum_check)
    report(6, "interval-wise negativity", worst_I < 0 and worst_sum < 1e-10,
           f"max I_i {worst_I:.3e}, max |sum I_i - 2 lambda| {worst_sum:.1e}")


def test_07_synchronization():
    m = corpus.standard_model()
    lam = lyap.lyapunov_quadrature(m, dens.solve_density(m)).value
    x0s = TWO_PI * np.arange(16) / 16
    times = np.arange(0.0, 500.0 + 1e-9, 0.1)
    snaps = dyn.simulate_ensemble(m, dyn.NoiseStream(0), x0s, 500.0, times)
    final = snaps[-1].max_pairwise_dist
    fit = dyn.decay_slope([s.t for s in snaps], [s.max_pairwise_dist for s in snaps])
    slope = fit[0] if fit else math.nan
    rel = abs(slope / lam - 1)
    control = [dyn.simulate_ensemble(m, dyn.NoiseStream(s), x0s, 500.0, [500.0], independent=True)[-1]
               .max_pairwise_dist for s in range(5)]
    ok = final < 1e-6 and rel < 0.25 and all(c > 0.5 for c in control)
    report(7, "synchronization", ok,
           f"final spread {final:.1e}, slope {slope:.4f} vs lambda {lam:.4f} ({rel:.0%} off), "
           f"control spreads min {min(control):.2f}")


def test_08_pullback():
    m = corpus.standard_model()
    res = dyn.pullback(m, dyn.NoiseStream(0), [0.0, math.pi / 2, math.pi, 3 * math.pi / 2],
                       [50.0, 100.0, 200.0])
    spread = dyn.max_pairwise_distance(res[-1]["endpoints"])
    drift = float(np.max(dyn.circle_distance(np.array(res[-1]["endpoints"]),
                                             np.array(res[-2]["endpoints"]))))
    report(8, "pullback convergence", spread < 1e-8 and drift < 1e-6,
           f"spread at depth 200 {spread:.2e}, drift 100->200 {drift:.2e}")


def test_09_integrator():
    m = corpus.standard_model()
    dts = [2.0**-k for k in range(4, 9)]
    err = dyn.strong_errors(m, dts, n_paths=500)
    q = float(np.polyfit(np.log(dts), np.log(err), 1)[0])
    kw = dict(total_time=1e4 + 100.0, burn_in=100.0, bins=256)
    a = dens.empirical_density(m, seed=0, stream_id=0, scheme="heun", **kw)
    b = dens.empirical_density(m, seed=0, stream_id=1, scheme="ito_em", **kw)
    l1 = float(np.sum(np.abs(a.estimate - b.estimate)) * TWO_PI / 256)
    report(9, "integrator convergence", 0.75 <= q <= 1.25 and l1 < 0.03,
           f"strong order {q:.3f}, Heun vs Ito-EM L1 {l1:.4f}")


def _run_all(root, models, workers):
    w = ["--workers", str(workers)]
    codes = [
        main(["analyze", "--model", models["std"], "--out", str(root / "analyze"),
              "--n-paths", "8", "--horizon", "50", "--seed", "3"] + w),
        main(["simulate", "--model", models["std"], "--out", str(root / "simulate"),
              "--horizon", "100", "--seed", "3", "--depths", "25,50"] + w),
        main(["simulate", "--model", models["std"], "--out", str(root / "control"),
              "--horizon", "100", "--seed", "3", "--depths", "25,50", "--independent-noise"] + w),
        main(["sweep", "--model", models["sin"], "--out", str(root / "sweep"), "--sigmas", "0.1,0.5",
              "--n-paths", "8", "--horizon", "50", "--seed", "3"] + w),
    ]
    return codes


def test_10_determinism(tmp_path, capsys):
    models = {}
    for name, m in (("std", corpus.standard_model()), ("sin", OscillatorModel(1.0, FourierFunction.sine(1)))):
        save_model(m, tmp_path / f"{name}.json")
        models[name] = str(tmp_path / f"{name}.json")
    codes = _run_all(tmp_path / "r1", models, 1) + _run_all(tmp_path / "r2", models, 4)
    mismatched, n_files = [], 0
    for sub in ("analyze", "simulate", "control", "sweep"):
        cmp = filecmp.dircmp(tmp_path / "r1" / sub, tmp_path / "r2" / sub)
        for f in cmp.common_files:
            n_files += 1
            if (tmp_path / "r1" / sub / f).read_bytes() != (tmp_path / "r2" / sub / f).read_bytes():
                mismatched.append(f"{sub}/{f}")
        mismatched += cmp.left_only + cmp.right_only
    capsys.readouterr()
    verify_out = []
    for _ in range(2):
        codes.append(main(["verify"]))
        verify_out.append(capsys.readouterr().out)
    ok = not mismatched and all(c == 0 for c in codes) and verify_out[0] == verify_out[1]
    report(10, "determinism", ok,
           f"{n_files} files compared across 1 vs 4 workers, mismatches {mismatched or 'none'}, "
           f"exit codes {codes}, verify output identical: {verify_out[0] == verify_out[1]}")
