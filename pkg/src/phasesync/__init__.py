"""Stochastic phase oscillators: stationary density and the Lyapunov exponent of the phase flow."""

from .phase_model import (
    FourierFunction,
    GenericityReport,
    NoiseCase,
    OscillatorModel,
    ZeroSet,
    check_genericity,
    find_zeros,
    load_model,
)
from .numerics import CircleGrid
from .density import DensityGrid, EmpiricalDensity, empirical_density, fp_residual, solve_density
from .lyapunov import (
    LyapunovEstimate,
    Method,
    interval_contributions,
    lyapunov_flux_form,
    lyapunov_monte_carlo,
    lyapunov_quadrature,
    lyapunov_two_point,
)
from .dynamics import NoiseStream, pullback, simulate_ensemble, simulate_path
from .analysis import Analysis, MCConfig, analyze

__version__ = "0.1.0"
