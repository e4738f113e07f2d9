"""scikit-learn style front end.

Each estimator takes its physical and numerical parameters in ``__init__``
(so ``get_params`` / ``set_params`` / ``clone`` work), solves in ``fit``
and stores results in trailing-underscore attributes. ``predict`` evaluates
the fitted profile(s) at arbitrary coordinates by trigonometric
interpolation, which makes fitted states usable as ordinary callables.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from . import grid as _g
from .functionals import ProblemParams
from .scalar import solve_scalar
from .solvers import SolveConfig
from .system import continue_bound, solve_ground
from .thresholds import (
    check_condition_H,
    default_lambda_candidates,
    gamma_matrix,
    lambda_bounds,
)

__all__ = [
    "FractionalGroundState",
    "CoupledGroundState",
    "BoundStateContinuation",
    "CouplingThresholds",
    "check_coordinates",
]


def check_coordinates(X, dim):
    """Validate query points: array of shape (n_samples, dim)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and dim == 1:
        X = X[:, None]
    X = check_array(X, dtype=float, ensure_2d=True)
    if X.shape[1] != dim:
        raise ValueError(f"X has {X.shape[1]} columns, expected {dim}")
    return X


def _default_box(dim):
    return 40.0 if dim == 1 else 20.0


def _default_n(dim):
    return 2048 if dim == 1 else 128


class _GridMixin:
    def _make_grid(self):
        L = self.box_length if self.box_length is not None else _default_box(self.dim)
        n = self.n_points if self.n_points is not None else _default_n(self.dim)
        return _g.make_grid(self.dim, L, n, self.s)

    def _solve_config(self):
        return SolveConfig(
            tol_dual_residual=self.tol,
            max_iterations=self.max_iter,
            step=self.step,
            newton_trigger=self.newton_trigger,
            **getattr(self, "_extra_config", {}),
        )


class FractionalGroundState(_GridMixin, BaseEstimator):
    """Positive radial ground state of ``(-Delta)^s u + lam u = mu |u|^{2p-2} u``.

    Parameters
    ----------
    s, p : float
        Fractional order and nonlinearity exponent.
    lam, mu : float
        Positive coefficients.
    dim : int, default=1
    box_length, n_points : optional
        Periodic box size and resolution; default 40 / 2048 in 1-D, 20 / 128 in 2-D.

    Attributes
    ----------
    profile_ : ndarray
    grid_ : Grid
    energy_, residual_dual_norm_, c_lambda_, tail_mass_ : float
    n_iter_ : int
    """

    def __init__(self, s=0.5, p=2.0, lam=1.0, mu=1.0, dim=1, box_length=None,
                 n_points=None, tol=1e-10, max_iter=20000, step=0.5, newton_trigger=1e-4):
        self.s = s
        self.p = p
        self.lam = lam
        self.mu = mu
        self.dim = dim
        self.box_length = box_length
        self.n_points = n_points
        self.tol = tol
        self.max_iter = max_iter
        self.step = step
        self.newton_trigger = newton_trigger

    def fit(self, X=None, y=None):
        grid = self._make_grid()
        res = solve_scalar(self.s, self.p, self.lam, self.mu, grid, self._solve_config())
        self.result_ = res
        self.grid_ = res.grid
        self.profile_ = res.profile
        self.energy_ = res.energy
        self.residual_dual_norm_ = res.residual_dual_norm
        self.c_lambda_ = res.c_lambda
        self.tail_mass_ = res.tail_mass
        self.n_iter_ = res.iterations
        return self

    def predict(self, X):
        """Profile values at the rows of ``X`` (shape (n_samples, dim))."""
        check_is_fitted(self, "profile_")
        X = check_coordinates(X, self.dim)
        return _g.interpolate(self.grid_, self.profile_, X)


class CoupledGroundState(_GridMixin, BaseEstimator):
    """Least-energy critical point of the coupled system via multi-start Nehari descent.

    ``beta`` is a scalar (m = 2) or a symmetric matrix with zero diagonal.
    """

    def __init__(self, s=0.5, p=2.0, lam=(1.0, 1.0), mu=(1.0, 1.0), beta=0.0, dim=1,
                 box_length=None, n_points=None, tol=1e-10, max_iter=20000, step=0.5,
                 newton_trigger=1e-4, starts=("coupled_bump", "semi_trivial_perturbed"),
                 random_state=0):
        self.s = s
        self.p = p
        self.lam = lam
        self.mu = mu
        self.beta = beta
        self.dim = dim
        self.box_length = box_length
        self.n_points = n_points
        self.tol = tol
        self.max_iter = max_iter
        self.step = step
        self.newton_trigger = newton_trigger
        self.starts = starts
        self.random_state = random_state

    def fit(self, X=None, y=None, initial=None):
        params = ProblemParams(self.s, self.p, self.dim, self.lam, self.mu, self.beta)
        self._extra_config = {"starts": tuple(self.starts), "rng_seed": int(self.random_state)}
        res = solve_ground(params, self._make_grid(), self._solve_config(), initial=initial)
        self.result_ = res
        self.grid_ = res.grid
        self.state_ = res.state
        self.phi_ = res.phi
        self.classification_ = res.classification
        self.dual_residual_ = res.dual_residual
        self.n_iter_ = res.iterations
        return self

    def predict(self, X):
        """Component values at the rows of ``X``; shape (n_samples, m)."""
        check_is_fitted(self, "state_")
        X = check_coordinates(X, self.dim)
        return np.column_stack([_g.interpolate(self.grid_, c, X) for c in self.state_])


class BoundStateContinuation(_GridMixin, BaseEstimator):
    """Branch of bound states ``u_eps`` with ``beta = eps * b`` grown from the decoupled state."""

    def __init__(self, s=0.5, p=2.0, lam=(1.0, 1.0), mu=(1.0, 1.0), b=None,
                 eps=(1e-3, 1e-2, 1e-1), dim=1, box_length=None, n_points=None, tol=1e-10,
                 max_iter=20000, step=0.5, newton_trigger=1e-4):
        self.s = s
        self.p = p
        self.lam = lam
        self.mu = mu
        self.b = b
        self.eps = eps
        self.dim = dim
        self.box_length = box_length
        self.n_points = n_points
        self.tol = tol
        self.max_iter = max_iter
        self.step = step
        self.newton_trigger = newton_trigger

    def fit(self, X=None, y=None):
        params = ProblemParams(self.s, self.p, self.dim, self.lam, self.mu)
        m = params.m
        b = np.ones((m, m)) - np.eye(m) if self.b is None else np.asarray(self.b, dtype=float)
        branch = continue_bound(params, b, list(self.eps), self._make_grid(), self._solve_config())
        self.branch_ = branch
        self.grid_ = branch[0].grid if branch else None
        self.distances_ = np.array([r.distance_to_z for r in branch])
        return self

    def predict(self, X):
        """Components of the last branch point at the rows of ``X``."""
        check_is_fitted(self, "branch_")
        X = check_coordinates(X, self.dim)
        last = self.branch_[-1].state
        return np.column_stack([_g.interpolate(self.grid_, c, X) for c in last])


class CouplingThresholds(_GridMixin, BaseEstimator):
    """Thresholds ``gamma_ij^2``, ``Lambda``, ``Lambda'`` and the positive-ground-state criterion."""

    def __init__(self, s=0.5, p=2.0, lam=(1.0, 1.0), mu=(1.0, 1.0), beta=0.0, dim=1,
                 box_length=None, n_points=None, lambda_candidates=None, tol=1e-10,
                 max_iter=20000, step=0.5, newton_trigger=1e-4):
        self.s = s
        self.p = p
        self.lam = lam
        self.mu = mu
        self.beta = beta
        self.dim = dim
        self.box_length = box_length
        self.n_points = n_points
        self.lambda_candidates = lambda_candidates
        self.tol = tol
        self.max_iter = max_iter
        self.step = step
        self.newton_trigger = newton_trigger

    def fit(self, X=None, y=None):
        params = ProblemParams(self.s, self.p, self.dim, self.lam, self.mu, self.beta)
        grid = self._make_grid()
        cfg = self._solve_config()
        base = solve_scalar(params.s, params.p, 1.0, 1.0, grid, cfg)
        cands = (default_lambda_candidates() if self.lambda_candidates is None
                 else self.lambda_candidates)
        report = check_condition_H(params, cands, base)
        if params.p == 2 and params.m >= 2:
            profiles = [
                solve_scalar(params.s, params.p, params.lam[j], params.mu[j], grid, cfg).profile
                for j in range(params.m)
            ]
            report.gamma_sq = gamma_matrix(params, profiles, base.grid)
            if params.m == 2:
                report.Lambda, report.LambdaPrime = lambda_bounds(params, profiles, base.grid)
        self.report_ = report
        return self
