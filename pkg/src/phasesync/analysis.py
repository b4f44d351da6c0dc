"""The analyze pipeline: genericity, density, every applicable estimator."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from . import density as dens
from . import lyapunov as lyap
from .errors import PhaseSyncError
from .numerics import DEFAULT_N
from .phase_model import OscillatorModel, check_genericity, model_to_dict

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MCConfig:
    seed: int = 0
    n_paths: int = 64
    horizon: float = 2000.0
    dt: float = 1e-3
    workers: int | None = None


@dataclass
class Analysis:
    summary: dict
    density: dens.DensityGrid | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def falsified(self) -> bool:
        """Generic model whose quadrature exponent is not negative."""
        lam = self.summary["lambda_quadrature"]
        return bool(self.summary["generic"]) and lam is not None and lam >= 0.0


def analyze(m: OscillatorModel, n: int = DEFAULT_N, mc: MCConfig | None = MCConfig()) -> Analysis:
    """Run the full pipeline; failures of individual estimators become nulls.

    Every key of the summary is always present; an unavailable quantity is
    None and its ``*_reason`` key says why.
    """
    warnings: list[str] = []
    rep = check_genericity(m)
    s: dict = {
        "model": model_to_dict(m),
        "n": n,
        "h1": rep.h1_holds,
        "h2": rep.h2_holds,
        "generic": rep.generic,
        "case": "Degenerate" if rep.zero_set.identically_zero else rep.case.value,
        "zeros": [{"phi": z.phi, "slope": z.slope} for z in rep.zero_set.zeros],
        "C": None,
        "residual": None,
        "residual_relative": None,
        "density_reason": None,
        "lambda_quadrature": None,
        "lambda_quadrature_reason": None,
        "lambda_flux": None,
        "lambda_flux_reason": None,
        "lambda_mc": None,
        "lambda_mc_reason": None,
        "intervals": None,
        "interval_sum_check": None,
        "negativity": None,
    }
    if not rep.h1_holds:
        warnings.append("H1 fails (coupling is constant): no negativity claim applies")
    if not rep.h2_holds:
        warnings.append("H2 fails (non-transversal zero): no negativity claim applies")

    d = None
    try:
        d = dens.solve_density(m, n)
    except PhaseSyncError as exc:
        s["density_reason"] = f"{type(exc).__name__}: {exc}"
        s["lambda_quadrature_reason"] = "no stationary density"
        s["lambda_flux_reason"] = "no stationary density"
    if d is not None:
        s["C"] = d.C
        s["residual"] = d.residual
        s["residual_relative"] = d.relative_residual(m)
        try:
            s["lambda_quadrature"] = lyap.lyapunov_quadrature(m, d).value
        except PhaseSyncError as exc:
            s["lambda_quadrature_reason"] = f"{type(exc).__name__}: {exc}"
        try:
            s["lambda_flux"] = lyap.lyapunov_flux_form(m, d).value
        except PhaseSyncError as exc:
            s["lambda_flux_reason"] = f"{type(exc).__name__}: {exc}"
        ic = lyap.interval_contributions(m, d)
        s["intervals"] = [{"lo": iv.lo, "hi": iv.hi, "I": iv.I} for iv in ic.intervals]
        s["interval_sum_check"] = ic.sum_check

    if mc is None:
        s["lambda_mc_reason"] = "Monte Carlo disabled"
    else:
        est = lyap.lyapunov_monte_carlo(m, mc.seed, mc.n_paths, mc.horizon, mc.dt, mc.workers)
        s["lambda_mc"] = {"value": est.value, "stderr": est.stderr, **est.metadata}

    lam = s["lambda_quadrature"]
    if not rep.generic:
        s["negativity"] = "not asserted"
    elif lam is None:
        s["negativity"] = "unavailable"
    else:
        s["negativity"] = "holds" if lam < 0 else "violated"
    for w in warnings:
        log.warning(w)
    s["warnings"] = list(warnings)
    return Analysis(s, d, warnings)
