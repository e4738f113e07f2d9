import numpy as np
import pytest

import oracles
from fracns import functionals as fn
from fracns import grid as g
from fracns.exceptions import IncompatibleBase, InvalidExponents, NoConvergence, ZeroState
from fracns.scalar import (
    c_lambda,
    check_scaling_law,
    scale_solution,
    scaling_exponent,
    solve_scalar,
)
from fracns.solvers import SolveConfig


@pytest.fixture(scope="module")
def frac_result():
    return solve_scalar(0.7, 2.0, 1.0, 1.0, g.make_grid(1, 60.0, 2048, 0.7))


@pytest.fixture(scope="module")
def sech_result():
    return solve_scalar(1.0, 2.0, 1.0, 1.0, g.make_grid(1, 40.0, 2048, 1.0))


def test_profile_shape(frac_result):
    u = frac_result.profile
    c = frac_result.grid.center_index[0]
    assert u.min() > 0
    assert np.array_equal(u[1:], u[1:][::-1])  # even about the centre node
    right = u[c:]
    assert np.all(np.diff(right) <= 0)
    assert frac_result.residual_dual_norm <= 1e-10


def test_energy_identity_and_nehari(frac_result):
    r = frac_result
    assert r.energy == pytest.approx(0.25 * r.norm_sq, rel=1e-10)
    psi = fn.nehari_psi(r.profile, r.params, r.grid)
    assert abs(psi) <= 1e-10 * r.norm_sq


def test_profile_in_other_parameters():
    r = solve_scalar(0.8, 3.0, 2.0, 0.5, g.make_grid(1, 40.0, 1024, 0.8))
    assert r.residual_dual_norm <= 1e-10
    assert r.energy == pytest.approx(r.norm_sq / 3.0, rel=1e-10)
    assert r.profile.min() > -1e-10 * r.profile.max()


def test_mesh_robustness():
    for s in (0.5, 0.7):
        a = solve_scalar(s, 2.0, 1.0, 1.0, g.make_grid(1, 40.0, 1024, s)).center_value
        b = solve_scalar(s, 2.0, 1.0, 1.0, g.make_grid(1, 40.0, 2048, s)).center_value
        assert abs(a - b) < 1e-8


def test_two_dimensional_profile():
    grid = g.make_grid(2, 20.0, 128, 0.8)
    r = solve_scalar(0.8, 2.0, 1.0, 1.0, grid)
    u = r.profile
    assert r.residual_dual_norm <= 1e-10
    assert u.min() > -1e-10 * u.max()
    assert np.array_equal(u, u.T)
    c = grid.n // 2
    assert np.all(np.diff(u[c, c:]) <= 0)
    fine = solve_scalar(0.8, 2.0, 1.0, 1.0, g.make_grid(2, 20.0, 256, 0.8))
    assert abs(fine.center_value - r.center_value) < 1e-4


def test_renormalization_oracle_other_order():
    L, n = 80.0, 2048
    r = solve_scalar(0.6, 2.0, 1.0, 1.0, g.make_grid(1, L, n, 0.6))
    assert np.max(np.abs(r.profile - oracles.renormalization_profile(0.6, 2.0, 1.0, 1.0, L, n))) < 1e-8


def test_scale_identity(frac_result):
    assert np.max(np.abs(scale_solution(frac_result, 1.0, 1.0) - frac_result.profile)) < 1e-12


def test_scale_exact_on_matched_box():
    s, lam, mu = 0.6, 2.0, 3.0
    kappa = lam ** (1 / (2 * s))
    base = solve_scalar(s, 2.0, 1.0, 1.0, g.make_grid(1, 80.0 * kappa, 4096, s))
    target = g.make_grid(1, 80.0, 4096, s)
    out = scale_solution(base, lam, mu, target=target)
    pr = fn.ProblemParams(s, 2.0, 1, [lam], [mu])
    assert fn.dual_residual_norm(fn.residual_gradient(out, pr, target), pr, target) <= 1e-6


def test_scale_needs_unit_base(frac_result):
    other = solve_scalar(0.7, 2.0, 2.0, 1.0, frac_result.grid)
    with pytest.raises(IncompatibleBase):
        scale_solution(other, 2.0, 1.0)
    with pytest.raises(IncompatibleBase):
        scale_solution(frac_result, 2.0, 1.0, s=0.8)


def test_c_lambda_sech_closed_form(sech_result):
    assert sech_result.c_lambda == pytest.approx(oracles.SECH_C1, rel=1e-10)


def test_c_lambda_is_scale_invariant(frac_result):
    r = frac_result
    a = c_lambda(r.profile, r.s, r.p, 1.0, r.grid)
    assert c_lambda(2 * r.profile, r.s, r.p, 1.0, r.grid) == pytest.approx(a, rel=1e-12)
    with pytest.raises(ZeroState):
        c_lambda(np.zeros_like(r.profile), r.s, r.p, 1.0, r.grid)


def test_ground_state_minimises_the_quotient(frac_result):
    r = frac_result
    rng = np.random.default_rng(0)
    base = c_lambda(r.profile, r.s, r.p, 1.0, r.grid)
    for _ in range(5):
        bumped = r.profile * (1 + 0.05 * rng.standard_normal(r.profile.shape))
        assert c_lambda(bumped, r.s, r.p, 1.0, r.grid) > base


def test_scaling_law_trivial_and_closed_form():
    grid = g.make_grid(1, 40.0, 1024, 1.0)
    assert check_scaling_law(1.0, 2.0, 1.0, grid) == 0.0
    assert check_scaling_law(1.0, 2.0, 2.0, grid) <= 1e-6
    assert scaling_exponent(1.0, 2.0, 1) == 0.75


def test_errors():
    with pytest.raises(InvalidExponents):
        solve_scalar(0.2, 2.0, 1.0, 1.0, g.make_grid(1, 20.0, 64, 0.2))
    with pytest.raises(NoConvergence):
        solve_scalar(0.7, 2.0, 1.0, 1.0, g.make_grid(1, 40.0, 512, 0.7),
                     SolveConfig(max_iterations=2, newton_max_steps=1))
