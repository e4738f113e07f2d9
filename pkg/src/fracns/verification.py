"""Self-contained invariant checks run by ``fracns verify``.

Each check returns ``(passed, detail)``. The fast set uses coarse grids and
finishes in a few seconds; the full set adds the finer solver checks.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import functionals as fn
from . import grid as _g
from .scalar import check_scaling_law, solve_scalar
from .system import classify, continue_bound, semitrivial_hessian_min_eig, solve_ground
from .thresholds import check_condition_H, condition_sides, gamma_sq

__all__ = ["CheckResult", "run_checks", "CHECKS"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def _plane_wave(fast):
    worst = 0.0
    for n in (64, 256) if fast else (64, 256, 2048):
        g = _g.make_grid(1, 20.0, n, 0.7)
        for k in (1, 3, n // 4):
            x = g.coords[0]
            u = np.cos(2 * np.pi * k * x / g.box_length)
            expect = (2 * np.pi * k / g.box_length) ** 1.4 * u
            worst = max(worst, np.max(np.abs(_g.apply_frac_lap(g, u) - expect)) / np.max(np.abs(expect)))
        worst = max(worst, np.max(np.abs(_g.apply_frac_lap(g, np.ones(n)))))
    return worst < 1e-10, f"max relative error {worst:.2e}"


def _resolvent_roundtrip(fast):
    g = _g.make_grid(2, 10.0, 32 if fast else 64, 0.6)
    u = np.random.default_rng(1).standard_normal(g.shape)
    back = _g.apply_frac_lap(g, _g.inverse_helmholtz(g, u, 1.5)) + 1.5 * _g.inverse_helmholtz(g, u, 1.5)
    err = np.max(np.abs(back - u)) / np.max(np.abs(u))
    return err < 1e-10, f"round-trip error {err:.2e}"


def _self_adjoint(fast):
    g = _g.make_grid(1, 30.0, 256, 0.45)
    rng = np.random.default_rng(2)
    u, v = rng.standard_normal((2, 256))
    a = _g.inner(g, _g.apply_frac_lap(g, u), v)
    b = _g.inner(g, u, _g.apply_frac_lap(g, v))
    err = _rel(a, b)
    return err < 1e-10, f"asymmetry {err:.2e}"


def _nehari(fast):
    g = _g.make_grid(1, 20.0, 128, 0.8)
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(10 if fast else 50):
        params = fn.ProblemParams(0.8, 2.0, 1, [1.0, 2.0], [1.0, 0.5], rng.uniform(0, 2))
        v = np.abs(rng.standard_normal((2, 128))) + 0.1
        u = fn.nehari_project(v, params, g).projected
        nrm = fn.state_norm_sq(u, params, g)
        worst = max(worst, abs(fn.nehari_psi(u, params, g)) / nrm)
        worst = max(worst, _rel(fn.energy_phi(u, params, g), 0.25 * nrm))
    return worst < 1e-10, f"worst defect {worst:.2e}"


def _hessian_fd(fast):
    g = _g.make_grid(1, 20.0, 64, 0.9)
    rng = np.random.default_rng(4)
    worst = 0.0
    for p, m in ((2.0, 2), (3.0, 3)):
        beta = rng.uniform(-1, 1, (m, m))
        beta = beta + beta.T
        np.fill_diagonal(beta, 0.0)
        params = fn.ProblemParams(0.9, p, 1, np.ones(m), np.ones(m), beta)
        u = 0.5 + rng.random((m, 64))
        h = rng.standard_normal((m, 64))
        d = 1e-5
        fd = (fn.residual_gradient(u + d * h, params, g) - fn.residual_gradient(u - d * h, params, g)) / (2 * d)
        an = fn.hessian_apply(u, h, params, g)
        worst = max(worst, np.max(np.abs(fd - an)) / np.max(np.abs(an)))
    return worst < 1e-6, f"finite-difference mismatch {worst:.2e}"


def _sech_oracle(fast):
    n = 512 if fast else 2048
    g = _g.make_grid(1, 40.0, n, 1.0)
    res = solve_scalar(1.0, 2.0, 1.0, 1.0, g)
    err = np.max(np.abs(res.profile - np.sqrt(2) / np.cosh(g.coords[0])))
    return err < 1e-6, f"max error vs sqrt(2) sech {err:.2e}"


def _energy_identity(fast):
    g = _g.make_grid(1, 60.0, 512 if fast else 2048, 0.7)
    res = solve_scalar(0.7, 2.0, 1.0, 1.0, g)
    err = _rel(res.energy, 0.25 * res.norm_sq)
    ok = err < 1e-10 and res.profile.min() > -1e-10 * res.profile.max()
    return ok, f"energy identity defect {err:.2e}, min/max {res.profile.min() / res.profile.max():.1e}"


def _threshold_crossing(fast):
    g = _g.make_grid(1, 30.0, 256, 0.8)
    prof = solve_scalar(0.8, 2.0, 1.0, 1.0, g).profile
    g1 = gamma_sq(prof, 2.0, 0.8, g)
    worst = 0.0
    for beta in (0.0, g1, 2 * g1):
        params = fn.ProblemParams(0.8, 2.0, 1, [1.0, 2.0], [1.0, 1.0], beta)
        val = semitrivial_hessian_min_eig(params, 1, [prof, None], g)
        worst = max(worst, abs(val - (1 - beta / g1)))
    return worst < 1e-10, f"gamma^2 = {g1:.12g}, crossing defect {worst:.2e}"


def _scaling(fast):
    g = _g.make_grid(1, 40.0, 1024 if fast else 2048, 1.0)
    d = max(check_scaling_law(1.0, 2.0, lam, g) for lam in (0.5, 2.0))
    return d < 1e-6, f"relative defect {d:.2e}"


def _condition_arith(fast):
    params = fn.ProblemParams(1.0, 2.0, 1, [1.0, 1.0], [1.0, 1.0], 1.0)
    lhs, rhs = condition_sides(params, [1.0, 1.0], 1.0)
    return (lhs, rhs) == (4.0, 8.0), f"LHS={lhs!r}, RHS={rhs!r}"


def _condition_sweep(fast):
    g = _g.make_grid(1, 40.0, 512, 1.0)
    base = solve_scalar(1.0, 2.0, 1.0, 1.0, g)
    rep = check_condition_H(fn.ProblemParams(1.0, 2.0, 1, [1.0, 1.0], [1.0, 1.0], 0.5), [1.0], base)
    ok = rep.H_lhs == 3.0 and rep.H_rhs == 6.0 and not rep.H_holds
    return ok, f"LHS={rep.H_lhs!r}, RHS={rep.H_rhs!r}"


def _ground_symmetric(fast):
    g = _g.make_grid(1, 40.0, 512 if fast else 1024, 1.0)
    params = fn.ProblemParams(1.0, 2.0, 1, [1.0, 1.0], [1.0, 1.0], 2.0)
    res = solve_ground(params, g)
    exact = np.sqrt(2.0 / 3.0) / np.cosh(g.coords[0])
    err = np.max(np.abs(res.state - exact))
    ok = res.classification == "positive" and err < 1e-5
    return ok, f"{res.classification}, max error {err:.2e}"


def _continuation(fast):
    g = _g.make_grid(1, 40.0, 512, 1.0)
    params = fn.ProblemParams(1.0, 2.0, 1, [1.0, 2.0], [1.0, 1.0])
    b = np.array([[0.0, 1.0], [1.0, 0.0]])
    branch = continue_bound(params, b, [0.0, 1e-3, 1e-2], g)
    ok = all(r.classification == "positive" and r.dual_residual <= 1e-10 for r in branch)
    ok = ok and branch[0].distance_to_z == 0.0
    return ok, "; ".join(f"eps={r.eps:g}: {r.classification}" for r in branch)


def _classification(fast):
    x = np.linspace(-1, 1, 16)
    cases = {
        "zero": np.zeros((2, 16)),
        "semi_trivial(2)": np.stack([np.zeros(16), np.ones(16)]),
        "positive": np.ones((2, 16)),
        "sign_changing": np.stack([np.ones(16), x]),
    }
    bad = [k for k, u in cases.items() if classify(u) != k]
    return not bad, "all labels correct" if not bad else f"wrong: {bad}"


CHECKS = [
    ("grid.plane_wave_and_constants", _plane_wave, True),
    ("grid.resolvent_round_trip", _resolvent_roundtrip, True),
    ("grid.self_adjoint", _self_adjoint, True),
    ("functionals.nehari_identities", _nehari, True),
    ("functionals.hessian_finite_difference", _hessian_fd, True),
    ("scalar.sech_oracle", _sech_oracle, True),
    ("scalar.energy_identity", _energy_identity, True),
    ("scalar.scaling_law", _scaling, True),
    ("thresholds.crossing", _threshold_crossing, True),
    ("thresholds.condition_arithmetic", _condition_arith, True),
    ("thresholds.condition_sweep", _condition_sweep, True),
    ("system.classification", _classification, True),
    ("system.symmetric_ground_state", _ground_symmetric, False),
    ("system.continuation", _continuation, False),
]


def run_checks(fast=False):
    """Run the invariant suite; the slower solver checks are skipped when ``fast``."""
    out = []
    for name, func, in_fast in CHECKS:
        if fast and not in_fast:
            continue
        t0 = time.perf_counter()
        try:
            ok, detail = func(fast)
        except Exception as exc:  # a crashing check is a failing check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
    return out
