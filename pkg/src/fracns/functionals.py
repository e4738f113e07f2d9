"""Energies, gradients and Nehari-set machinery for the m-component system.

A state is an array of shape ``(m, *grid.shape)``. With
``R_j = (-Delta)^s + lambda_j`` the energy is::

    Phi(u) = 1/2 sum_j ||u_j||_j^2 - 1/(2p) D(u)
    D(u)   = sum_j mu_j int |u_j|^{2p} + sum_{i != j} beta_ij int |u_i|^p |u_j|^p

where the interaction runs over ordered pairs, so for m = 2 the coupling
term equals ``beta * (1/p) int |u_1|^p |u_2|^p``. ``Psi = ||u||^2 - D(u)``
vanishes on the Nehari set.

Note on the second derivative: differentiating the functional gives a
coefficient of ``p * beta_jk`` (not ``p**2``) on the mixed block, and at a
semi-trivial point with p = 2 the transverse quadratic form is
``||h||^2 - beta int U^2 h^2`` with coefficient one.
"""

from dataclasses import dataclass

import numpy as np

from . import grid as _g
from .exceptions import (
    InvalidExponents,
    InvalidParams,
    NonPositiveDenominator,
    NonProjectable,
    ZeroState,
)

__all__ = [
    "ProblemParams",
    "NehariProjection",
    "as_state",
    "norm_j_sq",
    "state_norm_sq",
    "interaction",
    "energy_phi",
    "nehari_psi",
    "nehari_project",
    "nonlinearity",
    "residual_gradient",
    "psi_gradient",
    "psi_derivative",
    "hessian_apply",
    "e_quotient",
    "apply_resolvent",
    "dual_inner",
    "dual_residual_norm",
    "component_energy",
]


def validity_bound(p, dim):
    """Lower bound on s keeping 2p Sobolev-subcritical: (p - 1) N / (2p)."""
    return (p - 1.0) * dim / (2.0 * p)


@dataclass(frozen=True, eq=False)
class ProblemParams:
    """Parameters of the coupled system.

    ``beta`` may be given as a scalar when ``m == 2``; it is stored as a
    symmetric ``m x m`` matrix with zero diagonal.
    """

    s: float
    p: float
    dim: int
    lam: np.ndarray
    mu: np.ndarray
    beta: np.ndarray = None

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.lam, dtype=float))
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        m = lam.size
        if lam.ndim != 1 or mu.shape != lam.shape:
            raise InvalidParams("lambda and mu must be 1-D sequences of equal length")
        if np.any(lam <= 0) or np.any(mu <= 0):
            raise InvalidParams("lambda_j and mu_j must be positive")
        if self.dim not in (1, 2, 3):
            raise InvalidParams(f"dimension N must be 1, 2 or 3, got {self.dim!r}")
        if not 0 < self.s <= 1:
            raise InvalidParams(f"s must lie in (0, 1], got {self.s!r}")
        if not self.p >= 2:
            raise InvalidParams(f"p must be >= 2, got {self.p!r}")
        if not self.s > validity_bound(self.p, self.dim):
            raise InvalidExponents(
                f"need s > (p-1)N/(2p) = {validity_bound(self.p, self.dim):.6g}, got s={self.s}"
            )
        beta = np.zeros((m, m)) if self.beta is None else np.asarray(self.beta, dtype=float)
        if beta.ndim == 0:
            if m != 2:
                raise InvalidParams("a scalar coupling is only meaningful for m = 2")
            beta = np.array([[0.0, float(beta)], [float(beta), 0.0]])
        if beta.shape != (m, m):
            raise InvalidParams(f"beta must be {m}x{m}, got shape {beta.shape}")
        if not np.array_equal(beta, beta.T):
            raise InvalidParams("beta must be symmetric")
        if np.any(np.diag(beta) != 0):
            raise InvalidParams("beta must have a zero diagonal")
        for name, val in (("lam", lam), ("mu", mu), ("beta", beta)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def m(self):
        return self.lam.size

    @property
    def coupling(self):
        """Scalar coupling beta_12 (two-component convention)."""
        return float(self.beta[0, 1]) if self.m >= 2 else 0.0

    def with_beta(self, beta):
        return ProblemParams(self.s, self.p, self.dim, self.lam, self.mu, beta)

    def permuted(self, order):
        order = list(order)
        return ProblemParams(
            self.s, self.p, self.dim, self.lam[order], self.mu[order],
            self.beta[np.ix_(order, order)],
        )


@dataclass(frozen=True)
class NehariProjection:
    t: float
    projected: np.ndarray


def as_state(u, grid, m=None):
    u = np.asarray(u, dtype=float)
    if u.shape == grid.shape:
        u = u[None]
    if u.shape[1:] != grid.shape or (m is not None and u.shape[0] != m):
        raise InvalidParams(f"state shape {u.shape} incompatible with grid {grid.shape} and m={m}")
    if not np.all(np.isfinite(u)):
        raise InvalidParams("state contains non-finite values")
    return u


def _abspow(u, q):
    if q == 0:
        return np.ones_like(u)
    if q == 1:
        return np.abs(u)
    if q == 2:
        return u * u
    return np.abs(u) ** q


def _signpow(u, q):
    """|u|^(q-1) u, written as sign(u) |u|^q for non-integer q."""
    if q == 1:
        return u
    if q == 2:
        return np.abs(u) * u
    if q == 3:
        return u * u * u
    return np.sign(u) * np.abs(u) ** q


def _product(grid, a):
    return _g.dealias(grid, a) if grid.dealias_products else a


def _check_index(j, params):
    if not 0 <= j < params.m:
        raise IndexError(f"component index {j} out of range for m={params.m}")


def norm_j_sq(u, j, params, grid):
    """``||u||_j^2 = int u (-Delta)^s u + lambda_j u^2`` for one component (0-based ``j``)."""
    _check_index(j, params)
    u = grid.check_field(u)
    return _g.inner(grid, u, _g.apply_frac_lap(grid, u, params.s) + params.lam[j] * u)


def _apply_r(u, params, grid):
    return np.stack([
        _g.apply_frac_lap(grid, u[j], params.s) + params.lam[j] * u[j] for j in range(params.m)
    ])


def apply_resolvent(r, params, grid):
    """Blockwise ``R_j^{-1} r_j``: the Sobolev (E-metric) representative of a dual vector."""
    return np.stack([
        _g.inverse_helmholtz(grid, r[j], params.lam[j], params.s) for j in range(params.m)
    ])


def state_norm_sq(u, params, grid):
    u = as_state(u, grid, params.m)
    return _g.inner(grid, u, _apply_r(u, params, grid))


def interaction(u, params, grid):
    """``D(u) = sum_j mu_j int |u_j|^{2p} + sum_{i != j} beta_ij int |u_i|^p |u_j|^p``."""
    u = as_state(u, grid, params.m)
    p = params.p
    a = _abspow(u, p)
    total = sum(params.mu[j] * _g.integrate(grid, _product(grid, a[j] * a[j])) for j in range(params.m))
    for i in range(params.m):
        for j in range(params.m):
            if i != j and params.beta[i, j] != 0:
                total += params.beta[i, j] * _g.integrate(grid, _product(grid, a[i] * a[j]))
    return total


def energy_phi(u, params, grid):
    u = as_state(u, grid, params.m)
    return 0.5 * state_norm_sq(u, params, grid) - interaction(u, params, grid) / (2.0 * params.p)


def component_energy(u, j, params, grid):
    """Uncoupled energy ``I_j(u)``."""
    return 0.5 * norm_j_sq(u, j, params, grid) - params.mu[j] * _g.integrate(
        grid, _abspow(u, 2 * params.p)) / (2.0 * params.p)


def nehari_psi(u, params, grid):
    u = as_state(u, grid, params.m)
    return state_norm_sq(u, params, grid) - interaction(u, params, grid)


def nehari_project(v, params, grid):
    """Scale ``v`` onto the Nehari set: ``t = (||v||^2 / D(v))^{1/(2p-2)}``."""
    v = as_state(v, grid, params.m)
    if not np.any(v):
        raise ZeroState("cannot project the zero state")
    nsq = state_norm_sq(v, params, grid)
    d = interaction(v, params, grid)
    if not d > 0:
        raise NonProjectable(f"D(v) = {d:.6g} <= 0; no Nehari representative")
    t = (nsq / d) ** (1.0 / (2.0 * params.p - 2.0))
    return NehariProjection(float(t), t * v)


def nonlinearity(u, params, grid):
    """``N_j(u) = mu_j |u_j|^{2p-2} u_j + sum_{k != j} beta_jk |u_k|^p |u_j|^{p-2} u_j``."""
    u = as_state(u, grid, params.m)
    p = params.p
    a = _abspow(u, p)
    s = _signpow(u, p - 1)
    out = np.empty_like(u)
    for j in range(params.m):
        coupled = params.mu[j] * a[j]
        for k in range(params.m):
            if k != j and params.beta[j, k] != 0:
                coupled = coupled + params.beta[j, k] * a[k]
        out[j] = _product(grid, coupled * s[j])
    return out


def residual_gradient(u, params, grid):
    """Strong-form Euler-Lagrange residual ``R_j u_j - N_j(u)`` (the L2 gradient of Phi)."""
    u = as_state(u, grid, params.m)
    return _apply_r(u, params, grid) - nonlinearity(u, params, grid)


def psi_gradient(u, params, grid):
    """L2 gradient of Psi: ``2 R u - 2p N(u)``."""
    u = as_state(u, grid, params.m)
    return 2.0 * _apply_r(u, params, grid) - 2.0 * params.p * nonlinearity(u, params, grid)


def psi_derivative(u, h, params, grid):
    """Directional derivative ``(Psi'(u) | h)``."""
    return _g.inner(grid, psi_gradient(u, params, grid), as_state(h, grid, params.m))


def hessian_apply(u, h, params, grid):
    """Linearisation of :func:`residual_gradient` at ``u`` applied to ``h``."""
    u = as_state(u, grid, params.m)
    h = as_state(h, grid, params.m)
    p = params.p
    m = params.m
    a = _abspow(u, p)
    w = _abspow(u, p - 2)
    sp = _signpow(u, p - 1)
    out = _apply_r(h, params, grid)
    for j in range(m):
        diag = (2 * p - 1) * params.mu[j] * _abspow(u[j], 2 * p - 2)
        cross = np.zeros(grid.shape)
        for k in range(m):
            if k == j or params.beta[j, k] == 0:
                continue
            diag = diag + (p - 1) * params.beta[j, k] * a[k] * w[j]
            cross = cross + p * params.beta[j, k] * sp[j] * sp[k] * h[k]
        out[j] -= _product(grid, diag * h[j] + cross)
    return out


def e_quotient(u, params, grid):
    """Scale-invariant quotient ``||u||^2 / D(u)^{1/p}``."""
    u = as_state(u, grid, params.m)
    d = interaction(u, params, grid)
    if not d > 0:
        raise NonPositiveDenominator(f"D(u) = {d:.6g} <= 0")
    return state_norm_sq(u, params, grid) / d ** (1.0 / params.p)


def dual_inner(a, b, params, grid):
    """``sum_j int a_j R_j^{-1} b_j``, the inner product on the dual space."""
    return _g.inner(grid, a, apply_resolvent(b, params, grid))


def dual_residual_norm(r, params, grid):
    """``sum_j ||R_j^{-1} r_j||_j``; mesh-independent size of a residual."""
    g = apply_resolvent(r, params, grid)
    return float(sum(np.sqrt(max(_g.inner(grid, r[j], g[j]), 0.0)) for j in range(params.m)))
