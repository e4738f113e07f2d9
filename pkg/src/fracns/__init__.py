"""Spectral solvers for coupled fractional nonlinear Schrodinger systems.

Ground states, bound-state branches and coupling thresholds for

    (-Delta)^s u_j + lambda_j u_j = mu_j |u_j|^{2p-2} u_j + sum_k beta_jk |u_k|^p |u_j|^{p-2} u_j

on a periodic box, with a scikit-learn style facade in :mod:`fracns.estimators`.
"""

from .exceptions import (
    FracNSError,
    IncompatibleBase,
    InvalidExponents,
    InvalidGrid,
    InvalidParams,
    NewtonDiverged,
    NoConvergence,
    NonPositiveDenominator,
    NonPositiveLambda,
    NonProjectable,
    SchemaError,
    ValidityError,
    ZeroState,
    ZeroWeight,
)
from .functionals import ProblemParams, nehari_project
from .grid import Grid, apply_frac_lap, inverse_helmholtz, make_grid
from .scalar import ScalarResult, c_lambda, check_scaling_law, scale_solution, solve_scalar
from .solvers import SolveConfig
from .system import (
    SystemResult,
    classify,
    continue_bound,
    semitrivial_hessian_min_eig,
    solve_ground,
)
from .thresholds import ThresholdReport, check_condition_H, gamma_sq, lambda_bounds, theta

__version__ = "0.1.0"

__all__ = [
    "FracNSError", "IncompatibleBase", "InvalidExponents", "InvalidGrid", "InvalidParams",
    "NewtonDiverged", "NoConvergence", "NonPositiveDenominator", "NonPositiveLambda",
    "NonProjectable", "SchemaError", "ValidityError", "ZeroState", "ZeroWeight",
    "ProblemParams", "nehari_project", "Grid", "apply_frac_lap", "inverse_helmholtz",
    "make_grid", "ScalarResult", "c_lambda", "check_scaling_law", "scale_solution",
    "solve_scalar", "SolveConfig", "SystemResult", "classify", "continue_bound",
    "semitrivial_hessian_min_eig", "solve_ground", "ThresholdReport", "check_condition_H",
    "gamma_sq", "lambda_bounds", "theta",
]
