import numpy as np
import pytest

import oracles
from fracns import functionals as fn
from fracns import grid as g
from fracns.exceptions import InvalidParams, ZeroState, ZeroWeight
from fracns.scalar import solve_scalar
from fracns.thresholds import (
    check_condition_H,
    condition_sides,
    gamma_matrix,
    gamma_sq,
    lambda_bounds,
    theta,
)


@pytest.fixture(scope="module")
def small():
    grid = g.make_grid(1, 20.0, 128, 0.75)
    return grid, solve_scalar(0.75, 2.0, 1.0, 1.0, grid)


@pytest.fixture(scope="module")
def sech():
    grid = g.make_grid(1, 40.0, 1024, 1.0)
    return grid, solve_scalar(1.0, 2.0, 1.0, 1.0, grid)


def test_gamma_homogeneity_and_monotonicity(small):
    grid, r = small
    a = gamma_sq(r.profile, 1.0, 0.75, grid)
    assert gamma_sq(3.0 * r.profile, 1.0, 0.75, grid) == pytest.approx(a / 9.0, rel=1e-10)
    assert gamma_sq(r.profile, 2.0, 0.75, grid) > a


def test_gamma_equal_masses_is_one(small):
    # U solves R U = U^3, so U itself is the top eigenvector with eigenvalue 1
    grid, r = small
    assert gamma_sq(r.profile, 1.0, 0.75, grid) == pytest.approx(1.0, rel=1e-10)


def test_gamma_dense_oracle_unequal_masses(small):
    grid, r = small
    for lam in (0.5, 3.0):
        assert gamma_sq(r.profile, lam, 0.75, grid) == pytest.approx(
            oracles.dense_gamma_sq(r.profile, lam, 0.75, 20.0), rel=1e-8)


def test_gamma_zero_weight(small):
    grid, _ = small
    with pytest.raises(ZeroWeight):
        gamma_sq(np.zeros(128), 1.0, 0.75, grid)


def test_lambda_bounds(sech):
    grid, r = sech
    sym = fn.ProblemParams(1.0, 2.0, 1, [1.0, 1.0], [1.0, 1.0])
    lo, hi = lambda_bounds(sym, [r.profile, r.profile], grid)
    assert lo == pytest.approx(hi, rel=1e-10)
    assert lo == pytest.approx(1.0, rel=1e-10)
    small_grid = g.make_grid(1, 20.0, 128, 1.0)
    U = solve_scalar(1.0, 2.0, 1.0, 1.0, small_grid).profile
    lo, _ = lambda_bounds(sym, [U, U], small_grid)
    assert lo == pytest.approx(oracles.dense_gamma_sq(U, 1.0, 1.0, 20.0), rel=1e-8)
    pr = fn.ProblemParams(1.0, 2.0, 1, [1.0, 3.0], [1.0, 2.0])
    U2 = solve_scalar(1.0, 2.0, 3.0, 2.0, grid).profile
    lo, hi = lambda_bounds(pr, [r.profile, U2], grid)
    assert 0 < lo <= hi
    with pytest.raises(InvalidParams):
        lambda_bounds(fn.ProblemParams(0.9, 3.0, 1, [1.0, 1.0], [1.0, 1.0]), [U, U], grid)


def test_gamma_matrix_exchange_symmetry(sech):
    grid, r = sech
    pr = fn.ProblemParams(1.0, 2.0, 1, [1.0, 3.0], [1.0, 2.0], 0.4)
    U2 = solve_scalar(1.0, 2.0, 3.0, 2.0, grid).profile
    G = gamma_matrix(pr, [r.profile, U2], grid)
    Gs = gamma_matrix(pr.permuted([1, 0]), [U2, r.profile], grid)
    assert np.isnan(G[0, 0])
    assert Gs[0, 1] == pytest.approx(G[1, 0], rel=1e-12)
    assert Gs[1, 0] == pytest.approx(G[0, 1], rel=1e-12)


def test_theta_properties(sech):
    grid, r = sech
    assert theta(r.profile, 1.0, 1.0, grid) == 1.0
    assert theta(r.profile, 2.0, 1.0, grid) < 1.0
    a, b = oracles.SECH_GRAD_SQ, oracles.SECH_MASS
    for lam in (0.3, 2.0, 7.0):
        th = theta(r.profile, lam, 1.0, grid)
        assert th == pytest.approx((a + b) / (a + lam * b), rel=1e-10)
        assert 0 < th <= max(1.0, 1.0 / lam)
    with pytest.raises(ZeroState):
        theta(np.zeros_like(r.profile), 1.0, 1.0, grid)


def test_condition_examples(sech):
    grid, r = sech
    pr = fn.ProblemParams(1.0, 2.0, 1, [1.0, 1.0], [1.0, 1.0], 1.0)
    rep = check_condition_H(pr, 1.0, r)
    assert (rep.H_lhs, rep.H_rhs, rep.H_holds) == (4.0, 8.0, False)
    assert rep.c1 == pytest.approx(oracles.SECH_C1, rel=1e-10)
    for m in (2, 3, 4):
        pr = fn.ProblemParams(1.0, 2.0, 1, [2.0] * m, [1.5] * m)
        lhs, rhs = condition_sides(pr, [1.0] * m, 2.0)
        assert (lhs, rhs) == (m * 1.5, m * m * 1.5)


def test_condition_matches_written_out_form(sech):
    grid, r = sech
    rng = np.random.default_rng(3)
    for _ in range(10):
        lam = rng.uniform(0.5, 3, 2)
        mu = rng.uniform(0.5, 3, 2)
        beta = rng.uniform(0, 5)
        free = rng.uniform(0.1, 10)
        pr = fn.ProblemParams(1.0, 2.0, 1, lam, mu, beta)
        th = [theta(r.profile, lj / free, 1.0, grid) for lj in lam]
        got = condition_sides(pr, th, free)
        want = oracles.condition_sides_two(mu, lam, beta, th[0], th[1], free, 1.0, 2.0, 1)
        assert got == pytest.approx(want, rel=1e-12)


def test_condition_reports_witness(sech):
    grid, r = sech
    pr = fn.ProblemParams(1.0, 2.0, 1, [1.0, 1.0], [1.0, 1.0], 200.0)
    rep = check_condition_H(pr, np.logspace(-3, 3, 61), r)
    k = list(rep.candidates).index(rep.lambda_used)
    assert rep.H_holds == (rep.H_lhs > rep.H_rhs)
    assert rep.lhs_values[k] == rep.H_lhs
