"""Minimal Dirichlet energy of degree-j maps between planar annuli.

Closed-form minimizers and energies, log-polar grid discretization, a
projected minimizer, and free-Lagrangian lower-bound certificates.
"""

from .certificates import CertificateReport, certify, lower_bound
from .closedform import (
    ProblemSpec,
    Regime,
    critical_radius,
    energy_closed,
    eval_g_circ,
    eval_g_diamond,
    eval_minimizer,
    is_above_bound,
    minimizer,
    nitsche_rhs,
    normalize_problem,
    solve_radial,
)
from .errors import AdmissibilityError, AnnulusError, DomainError, InvalidAnnulusError, RegimeError, WindingError
from .kernels import BACKEND
from .mapio import load_map, save_map
from .optimizer import ConvergenceReport, OptimizerConfig, initialize, minimize
from .polargrid import DiscreteMap, PolarGrid, degree_estimate, dirichlet_energy, sample_map

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError",
    "AnnulusError",
    "BACKEND",
    "CertificateReport",
    "ConvergenceReport",
    "DiscreteMap",
    "DomainError",
    "InvalidAnnulusError",
    "OptimizerConfig",
    "PolarGrid",
    "ProblemSpec",
    "Regime",
    "RegimeError",
    "WindingError",
    "certify",
    "critical_radius",
    "degree_estimate",
    "dirichlet_energy",
    "energy_closed",
    "eval_g_circ",
    "eval_g_diamond",
    "eval_minimizer",
    "initialize",
    "is_above_bound",
    "load_map",
    "lower_bound",
    "minimize",
    "minimizer",
    "nitsche_rhs",
    "normalize_problem",
    "sample_map",
    "save_map",
    "solve_radial",
]
