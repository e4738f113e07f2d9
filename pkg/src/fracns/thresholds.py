"""Coupling thresholds and the positive-ground-state criterion.

``gamma_sq`` is the bottom of the weighted spectrum
``inf ||phi||_j^2 / int U_i^2 phi^2``; it is computed as the reciprocal of
the top eigenvalue of ``K phi = R_j^{-1}(U_i^2 phi)``, which is
self-adjoint in the ``(.|.)_j`` inner product, by power iteration.
Only the quadratic (p = 2) weight is implemented: for p > 2 the transverse
Hessian at a semi-trivial point does not depend on the coupling.
"""

from dataclasses import dataclass, field

import numpy as np

from . import grid as _g
from .exceptions import InvalidParams, NoConvergence, ZeroState, ZeroWeight
from .scalar import c_lambda, scaling_exponent

__all__ = [
    "ThresholdReport",
    "gamma_sq",
    "gamma_matrix",
    "lambda_bounds",
    "theta",
    "check_condition_H",
    "default_lambda_candidates",
]


@dataclass
class ThresholdReport:
    gamma_sq: np.ndarray = None
    Lambda: float = None
    LambdaPrime: float = None
    theta: np.ndarray = None
    c1: float = None
    H_lhs: float = None
    H_rhs: float = None
    H_holds: bool = None
    lambda_used: float = None
    candidates: np.ndarray = field(default=None, repr=False)
    lhs_values: np.ndarray = field(default=None, repr=False)
    rhs_values: np.ndarray = field(default=None, repr=False)


def _form_j(grid, phi, lam, s):
    return _g.inner(grid, phi, _g.apply_frac_lap(grid, phi, s) + lam * phi)


def gamma_sq(weight_profile, lambda_j, s, grid, tol=1e-12, max_iter=10000,
             return_eigenvector=False):
    """``inf_phi ||phi||_j^2 / int U^2 phi^2`` for the weight ``U = weight_profile``.

    Parameters
    ----------
    weight_profile : ndarray
        The semi-trivial profile ``U_i``.
    lambda_j : float
        Mass of the norm in the numerator.
    tol : float
        Stop once successive Rayleigh quotients agree to this relative tolerance.
    return_eigenvector : bool
        Also return the maximising direction, normalised in ``||.||_j``.
    """
    u = grid.check_field(weight_profile, "weight_profile")
    w = u * u
    if not np.any(w):
        raise ZeroWeight("weight profile is identically zero")
    phi = u / np.sqrt(_form_j(grid, u, lambda_j, s))
    rq = _g.inner(grid, w * phi, phi)
    for _ in range(max_iter):
        nxt = _g.inverse_helmholtz(grid, w * phi, lambda_j, s)
        phi = nxt / np.sqrt(_form_j(grid, nxt, lambda_j, s))
        new = _g.inner(grid, w * phi, phi)
        if abs(new - rq) <= tol * abs(new):
            rq = new
            break
        rq = new
    else:
        raise NoConvergence(f"power iteration did not converge in {max_iter} steps")
    # phi is j-normalised, so the quotient at phi is exactly 1 / rq
    value = 1.0 / rq
    return (value, phi) if return_eigenvector else value


def gamma_matrix(params, profiles, grid, **kw):
    """``G[i, j] = gamma_ij^2`` (weight ``U_i``, norm index ``j``); diagonal is NaN."""
    m = params.m
    out = np.full((m, m), np.nan)
    for i in range(m):
        for j in range(m):
            if i != j:
                out[i, j] = gamma_sq(profiles[i], params.lam[j], params.s, grid, **kw)
    return out


def lambda_bounds(params, scalar_profiles, grid, **kw):
    """``(Lambda, Lambda')`` = min/max of ``gamma_1^2, gamma_2^2`` for m = 2, p = 2."""
    if params.m != 2 or params.p != 2:
        raise InvalidParams("lambda_bounds is defined for m = 2 and p = 2")
    g1 = gamma_sq(scalar_profiles[0], params.lam[1], params.s, grid, **kw)
    g2 = gamma_sq(scalar_profiles[1], params.lam[0], params.s, grid, **kw)
    return min(g1, g2), max(g1, g2)


def _theta_forms(base_profile, s, grid):
    u = grid.check_field(base_profile, "base_profile")
    if not np.any(u):
        raise ZeroState("theta of the zero profile")
    return _g.inner(grid, u, _g.apply_frac_lap(grid, u, s)), _g.inner(grid, u, u)


def theta(base_profile, lam, s, grid):
    """``(a + b) / (a + lam b)`` with ``a`` the ``H^s`` seminorm and ``b`` the mass of the base."""
    a, b = _theta_forms(base_profile, s, grid)
    return (a + b) / (a + lam * b)


def default_lambda_candidates():
    return np.logspace(-3, 3, 61)


def condition_sides(params, thetas, lam):
    """Both sides of the criterion for one free parameter ``lam`` given ``Theta_{lambda_j/lam}``."""
    p = params.p
    kappa = scaling_exponent(params.s, p, params.dim)
    m = params.m
    th = np.asarray(thetas, dtype=float)
    lhs = float(np.sum(params.mu * th**p))
    off = ~np.eye(m, dtype=bool)
    pair = np.outer(th, th) ** (p / 2.0)
    lhs += float(np.sum((params.beta * pair)[off]))
    mu_term = float(np.max(params.mu * (lam / params.lam) ** (p * kappa)))
    if m > 1:
        ratio = (lam * lam / np.outer(params.lam, params.lam)) ** (0.5 * p * kappa)
        beta_term = float(np.max((params.beta * ratio)[off]))
    else:
        beta_term = 0.0
    return lhs, m * m * (mu_term + beta_term)


def check_condition_H(params, lambda_free, base):
    """Evaluate the positive-ground-state criterion over candidate free parameters.

    ``base`` is the ``lambda = mu = 1`` scalar result for the same ``s, p``.
    The criterion holds if any candidate gives ``LHS > RHS``; the witness
    (or, failing that, the candidate with the largest margin) is reported.
    """
    grid = base.grid
    cands = np.atleast_1d(np.asarray(lambda_free, dtype=float))
    a, b = _theta_forms(base.profile, params.s, grid)
    lhs_all = np.empty(cands.size)
    rhs_all = np.empty(cands.size)
    for k, lam in enumerate(cands):
        thetas = [(a + b) / (a + (lj / lam) * b) for lj in params.lam]
        lhs_all[k], rhs_all[k] = condition_sides(params, thetas, lam)
    margin = lhs_all - rhs_all
    holds = margin > 0
    k = int(np.argmax(holds)) if holds.any() else int(np.argmax(margin))
    lam_used = float(cands[k])
    return ThresholdReport(
        theta=np.array([(a + b) / (a + (lj / lam_used) * b) for lj in params.lam]),
        c1=c_lambda(base.profile, params.s, params.p, 1.0, grid),
        H_lhs=float(lhs_all[k]),
        H_rhs=float(rhs_all[k]),
        H_holds=bool(holds.any()),
        lambda_used=lam_used,
        candidates=cands,
        lhs_values=lhs_all,
        rhs_values=rhs_all,
    )
