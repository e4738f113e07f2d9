"""Ground and bound states of the coupled m-component system.

Ground states come from multi-start minimisation of Phi on the Nehari set
followed by Newton on the full residual. Bound states near the decoupled
point ``z = (U_1, ..., U_m)`` come from Newton continuation in the
coupling scale ``eps`` with ``beta = eps * b``.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import functionals as fn
from . import grid as _g
from .exceptions import (
    InvalidParams,
    NewtonDiverged,
    NoConvergence,
    NonProjectable,
)
from .scalar import initial_bump, scale_solution, solve_scalar
from .solvers import IterationLog, SolveConfig, newton_polish, solve_from
from .thresholds import gamma_sq

logger = logging.getLogger(__name__)

__all__ = [
    "SystemResult",
    "classify",
    "solve_ground",
    "continue_bound",
    "semitrivial_hessian_min_eig",
    "lagrange_multiplier",
    "build_result",
    "max_workers",
]

_CLASS_RANK = {"positive": 0, "semi_trivial": 1, "nonnegative": 2, "sign_changing": 3, "zero": 4}


def max_workers():
    """Worker cap from ``FRACNS_THREADS`` (default: available cores)."""
    env = os.environ.get("FRACNS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning("ignoring non-integer FRACNS_THREADS=%r", env)
    return os.cpu_count() or 1


@dataclass(frozen=True, eq=False)
class SystemResult:
    state: np.ndarray
    params: fn.ProblemParams
    grid: _g.Grid
    phi: float
    psi: float
    lagrange_multiplier_estimate: float
    dual_residual: float
    classification: str
    per_component_min: np.ndarray
    per_component_linf: np.ndarray
    start_used: str
    iterations: int
    tail_mass: float
    eps: float = None
    distance_to_z: float = None

    @property
    def norm_sq(self):
        return fn.state_norm_sq(self.state, self.params, self.grid)


def classify(state, tol_zero=1e-10):
    """Label a state as ``zero``, ``semi_trivial(j)``, ``positive``, ``nonnegative`` or ``sign_changing``.

    A component is zero when its sup-norm is below ``tol_zero``. A nonzero
    component counts as positive when its minimum is above
    ``-tol_zero * sup|u_j|``: decaying tails sit at round-off level on the
    grid and cannot be resolved as strictly positive.
    ``semi_trivial`` uses 1-based component indices.
    """
    u = np.asarray(state, dtype=float)
    m = u.shape[0]
    flat = u.reshape(m, -1)
    linf = np.max(np.abs(flat), axis=1)
    mins = np.min(flat, axis=1)
    nonzero = linf >= tol_zero
    if not nonzero.any():
        return "zero"
    if nonzero.sum() == 1 and m > 1:
        return f"semi_trivial({int(np.argmax(nonzero)) + 1})"
    nonneg = mins[nonzero] > -tol_zero * linf[nonzero]
    if nonneg.all():
        return "positive" if nonzero.all() else "nonnegative"
    return "sign_changing"


def _class_key(label):
    return _CLASS_RANK[label.split("(")[0]]


def lagrange_multiplier(u, params, grid):
    """Least-squares ``omega`` in ``Phi'(u) = omega Psi'(u)`` in the dual metric."""
    dphi = fn.residual_gradient(u, params, grid)
    dpsi = fn.psi_gradient(u, params, grid)
    den = fn.dual_inner(dpsi, dpsi, params, grid)
    return fn.dual_inner(dphi, dpsi, params, grid) / den if den > 0 else 0.0


def build_result(u, params, grid, cfg, start, iterations, eps=None, distance=None):
    r = fn.residual_gradient(u, params, grid)
    flat = u.reshape(params.m, -1)
    return SystemResult(
        state=u,
        params=params,
        grid=grid,
        phi=fn.energy_phi(u, params, grid),
        psi=fn.nehari_psi(u, params, grid),
        lagrange_multiplier_estimate=lagrange_multiplier(u, params, grid),
        dual_residual=fn.dual_residual_norm(r, params, grid),
        classification=classify(u, cfg.tol_zero),
        per_component_min=flat.min(axis=1),
        per_component_linf=np.abs(flat).max(axis=1),
        start_used=start,
        iterations=iterations,
        tail_mass=_g.tail_mass(grid, u),
        eps=eps,
        distance_to_z=distance,
    )


def _check_grid(params, grid):
    if grid.dim != params.dim:
        raise InvalidParams(f"grid dimension {grid.dim} != problem dimension {params.dim}")
    if grid.s != params.s:
        grid = _g.make_grid(grid.dim, grid.box_length, grid.n, params.s, grid.dealias_products)
    return grid


def _starts(params, grid, cfg, initial):
    out = []
    for kind in cfg.starts:
        if kind == "coupled_bump":
            out.append(("coupled_bump", np.stack([
                initial_bump(grid, params.s, params.p, params.lam[j], params.mu[j])
                for j in range(params.m)
            ])))
        elif kind == "semi_trivial_perturbed":
            base = solve_scalar(params.s, params.p, 1.0, 1.0, grid, cfg)
            rng = np.random.default_rng(cfg.rng_seed)
            for j in range(params.m):
                u = np.empty((params.m,) + grid.shape)
                for k in range(params.m):
                    if k == j:
                        u[k] = scale_solution(base, params.lam[k], params.mu[k], target=grid)
                    else:
                        amp = cfg.perturbation * (1.0 + 0.5 * rng.random())
                        u[k] = amp * initial_bump(grid, params.s, params.p, params.lam[k], 1.0)
                out.append((f"semi_trivial_perturbed({j + 1})", u))
        elif kind == "user_supplied":
            if initial is None:
                raise InvalidParams("start 'user_supplied' needs an initial state")
            out.append(("user_supplied", fn.as_state(initial, grid, params.m)))
    return out


def _run_start(item, params, grid, cfg):
    name, u0 = item
    try:
        u, log = solve_from(u0, params, grid, cfg, IterationLog())
    except (NoConvergence, NonProjectable) as exc:
        logger.info("start %s failed: %s", name, exc)
        return exc
    return build_result(u, params, grid, cfg, name, log.iterations)


def solve_ground(params, grid, cfg=None, initial=None):
    """Lowest-energy converged critical point over the configured starts.

    Ties within 1e-12 in Phi prefer positive over semi-trivial over
    sign-changing, then the earlier start.
    """
    cfg = cfg or SolveConfig()
    grid = _check_grid(params, grid)
    starts = _starts(params, grid, cfg, initial)
    workers = min(max_workers(), len(starts))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            outcomes = list(pool.map(lambda it: _run_start(it, params, grid, cfg), starts))
    else:
        outcomes = [_run_start(it, params, grid, cfg) for it in starts]
    good = [(k, r) for k, r in enumerate(outcomes) if isinstance(r, SystemResult)]
    if not good:
        if all(isinstance(r, NonProjectable) for r in outcomes):
            raise NonProjectable("no start admits a Nehari representative")
        raise NoConvergence("; ".join(str(r) for r in outcomes))
    best_phi = min(r.phi for _, r in good)
    tied = [(k, r) for k, r in good if r.phi - best_phi <= 1e-12 * max(1.0, abs(best_phi))]
    tied.sort(key=lambda kr: (_class_key(kr[1].classification), kr[0]))
    return tied[0][1]


def _distance(u, z, params, grid):
    return float(np.sqrt(max(fn.state_norm_sq(u - z, params, grid), 0.0)))


def decoupled_state(params, grid, cfg):
    """``z = (U_1, ..., U_m)`` from scaled copies of the unit profile, polished by Newton."""
    base_params = params.with_beta(np.zeros((params.m, params.m)))
    base = solve_scalar(params.s, params.p, 1.0, 1.0, grid, cfg)
    z0 = np.stack([
        scale_solution(base, params.lam[j], params.mu[j], target=grid) for j in range(params.m)
    ])
    try:
        return newton_polish(z0, base_params, grid, cfg)
    except NewtonDiverged:
        logger.info("scaled profiles outside Newton basin; solving components directly")
        return np.stack([
            solve_scalar(params.s, params.p, params.lam[j], params.mu[j], grid, cfg).profile
            for j in range(params.m)
        ])


def _newton_at(u, params, grid, cfg, eps):
    log = IterationLog()
    try:
        out = newton_polish(u, params, grid, cfg, log)
    except NewtonDiverged as exc:
        raise NewtonDiverged(eps, message=f"eps={eps!r}: {exc}") from exc
    # a vanished component means Newton jumped to the trivial or a semi-trivial branch
    linf = np.abs(out.reshape(params.m, -1)).max(axis=1)
    if np.any(linf < cfg.tol_zero):
        raise NewtonDiverged(eps, message=f"eps={eps!r}: converged off the branch (a component vanished)")
    return out, log.newton_steps


def continue_bound(params_base, b_matrix, eps_list, grid, cfg=None):
    """Newton continuation of the decoupled state ``z`` in ``beta = eps * b``.

    Returns one :class:`SystemResult` per ``eps``; ``eps == 0`` returns ``z``
    itself. On divergence the step is bisected once; if that also fails,
    :class:`NewtonDiverged` is raised with the results obtained so far.
    """
    cfg = cfg or SolveConfig()
    grid = _check_grid(params_base, grid)
    b = np.asarray(b_matrix, dtype=float)
    fn.ProblemParams(params_base.s, params_base.p, params_base.dim, params_base.lam,
                     params_base.mu, b)  # validates symmetry / shape
    eps_list = [float(e) for e in eps_list]
    if any(abs(a) > abs(c) for a, c in zip(eps_list, eps_list[1:])):
        raise InvalidParams("eps values must be sorted by |eps| ascending")
    z = decoupled_state(params_base, grid, cfg)
    results = []
    u, prev_eps = z, 0.0
    for eps in eps_list:
        params = params_base.with_beta(eps * b)
        if eps == 0.0:
            results.append(build_result(z.copy(), params, grid, cfg, "decoupled", 0, eps, 0.0))
            continue
        try:
            u_new, steps = _newton_at(u, params, grid, cfg, eps)
        except NewtonDiverged:
            mid = 0.5 * (prev_eps + eps)
            logger.info("Newton diverged at eps=%g; bisecting via %g", eps, mid)
            try:
                u_mid, s1 = _newton_at(u, params_base.with_beta(mid * b), grid, cfg, mid)
                u_new, s2 = _newton_at(u_mid, params, grid, cfg, eps)
                steps = s1 + s2
            except NewtonDiverged as exc:
                raise NewtonDiverged(eps, results, f"branch lost at eps={eps!r}") from exc
        u, prev_eps = u_new, eps
        dist = _distance(u, z, params, grid)
        results.append(build_result(u, params, grid, cfg, "continuation", steps, eps, dist))
    return results


def semitrivial_hessian_min_eig(params, which, scalar_profiles, grid, cfg=None):
    """Transverse curvature of Phi at the semi-trivial state with slot ``which`` (1-based) filled.

    Evaluates ``<Phi''(u_which) h, h> / ||phi||_j^2`` at ``h = (0, phi)``
    with ``phi`` the maximiser behind ``gamma^2``; equals ``1 - beta / gamma^2``.
    """
    if params.p != 2 or params.m != 2:
        raise InvalidParams("the transverse threshold is defined for p = 2, m = 2")
    grid = _check_grid(params, grid)
    i = which - 1
    j = 1 - i
    weight = grid.check_field(scalar_profiles[i], "scalar_profiles[which]")
    _, phi = gamma_sq(weight, params.lam[j], params.s, grid, return_eigenvector=True)
    u = np.zeros((2,) + grid.shape)
    u[i] = weight
    h = np.zeros_like(u)
    h[j] = phi
    quad = _g.inner(grid, fn.hessian_apply(u, h, params, grid), h)
    return quad / fn.norm_j_sq(phi, j, params, grid)
