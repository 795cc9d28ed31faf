import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zklab.errors import DensityFloorViolated, NoConvergence
from zklab.grid import make_grid, random_smooth_field
from zklab.poisson import (
    SolverConfig,
    apply_M,
    invert_M,
    monotone_solve,
    poisson_residual,
    solve_scaled,
    solve_unscaled,
)


@pytest.fixture(scope="module")
def grid():
    return make_grid(2, [64, 64], [20.0, 20.0])


def smooth(grid, seed, amp=0.5, corr=1.5):
    return random_smooth_field(grid, np.random.default_rng(seed), amplitude=amp, corr_length=corr)


def test_zero_density(grid):
    phi, d = solve_unscaled(grid, np.zeros(grid.shape))
    assert np.all(phi == 0) and d.residual == 0 and d.iterations == 0


@pytest.mark.parametrize("c", [-0.7, -0.2, 0.3, 2.0])
def test_constant_density(grid, c):
    phi, _ = solve_unscaled(grid, np.full(grid.shape, c))
    assert np.max(np.abs(phi - math.log1p(c))) <= 1e-12


@pytest.mark.parametrize("eps", [1.0, 0.3, 0.01])
def test_constant_density_scaled(grid, eps):
    phi, _ = solve_scaled(grid, np.full(grid.shape, 0.4), eps)
    assert np.max(np.abs(phi - math.log1p(0.4 * eps) / eps)) <= 1e-12


def test_floor_violation(grid):
    with pytest.raises(DensityFloorViolated):
        solve_unscaled(grid, np.full(grid.shape, -1.0))
    with pytest.raises(DensityFloorViolated):
        solve_scaled(grid, np.full(grid.shape, -20.0), 0.1)


def test_no_convergence_reported(grid):
    with pytest.raises(NoConvergence) as info:
        solve_unscaled(grid, smooth(grid, 1), SolverConfig(max_iter=1))
    assert info.value.iterations == 1 and info.value.residual > 0


def test_bounds_and_energy(grid):
    for seed in range(5):
        n = smooth(grid, seed, amp=0.6)
        phi, d = solve_unscaled(grid, n)
        assert d.residual <= 1e-11
        assert d.bound_lo - 1e-10 <= phi.min() and phi.max() <= d.bound_hi + 1e-10
        assert d.energy_lhs <= 0.5 * d.I1 + 1e-8
        assert d.c_inf == pytest.approx(float(np.min(1 + n)))


def test_large_density_skips_bounds(grid):
    n = smooth(grid, 3, amp=1.5) + 0.6
    phi, d = solve_unscaled(grid, n)
    assert not d.bounds_apply and d.residual <= 1e-11


def test_warm_start_independence(grid):
    n = smooth(grid, 4)
    phi_a, _ = solve_unscaled(grid, n)
    phi_b, _ = solve_unscaled(grid, n, SolverConfig(warm_start=np.full(grid.shape, 0.3)))
    assert grid.l2_norm(phi_a - phi_b) <= 1e-10


def test_monotone_matches_newton(grid):
    n = smooth(grid, 5, amp=0.4)
    seen = []
    phi_m, dm = monotone_solve(grid, n, callback=lambda it, phi: seen.append(phi.copy()))
    phi_n, _ = solve_unscaled(grid, n)
    assert grid.l2_norm(phi_m - phi_n) <= 1e-9
    assert all(np.all(b >= a - 1e-13) for a, b in zip(seen, seen[1:]))
    assert dm.bound_lo - 1e-13 <= min(p.min() for p in seen)


def test_monotone_trivial_cases(grid):
    phi, d = monotone_solve(grid, np.zeros(grid.shape))
    assert np.all(phi == 0)
    phi, _ = monotone_solve(grid, np.full(grid.shape, 0.3))
    assert np.max(np.abs(phi - math.log(1.3))) < 1e-10


def test_monotone_rejects_small_lambda(grid):
    with pytest.raises(ValueError):
        monotone_solve(grid, np.full(grid.shape, 0.3), SolverConfig(lam=1.0))
    with pytest.raises(DensityFloorViolated):
        monotone_solve(grid, np.full(grid.shape, 1.0))


def test_quasineutral_limit(grid):
    X, Y = grid.coords()
    n = 0.5 * np.exp(-(X**2 + Y**2) / 4)
    errs = []
    for eps in (0.2, 0.1, 0.05):
        phi, _ = solve_scaled(grid, n, eps)
        errs.append(grid.l2_norm(phi - n))
    assert errs[0] > errs[1] > errs[2]
    order = np.polyfit(np.log([0.2, 0.1, 0.05]), np.log(errs), 1)[0]
    assert abs(order - 1) < 0.15


def test_scaled_residual(grid):
    n = smooth(grid, 6)
    phi, d = solve_scaled(grid, n, 0.1)
    assert grid.l2_norm(poisson_residual(grid, phi, n, 0.1)) <= 1e-11
    assert d.bound_lo <= phi.min() and phi.max() <= d.bound_hi


def test_apply_M_eigenfunction():
    g = make_grid(1, [32], [2 * np.pi])
    x = g.axis_coords(0)
    out = apply_M(g, np.zeros(32), np.cos(x), 1.0)
    assert np.max(np.abs(out - 2 * np.cos(x))) < 1e-13


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), eps=st.sampled_from([1.0, 0.1, 0.01]))
def test_apply_M_symmetric_and_coercive(seed, eps):
    g = make_grid(2, [32, 32], [10.0, 10.0])
    rng = np.random.default_rng(seed)
    phi = random_smooth_field(g, rng, amplitude=2.0)
    u = random_smooth_field(g, rng)
    w = random_smooth_field(g, rng)
    a, b = g.inner(apply_M(g, phi, u, eps), w), g.inner(u, apply_M(g, phi, w, eps))
    assert a == pytest.approx(b, rel=1e-12)
    m = np.max(np.abs(phi))
    grad2 = g.l2_norm(np.sqrt(np.sum(g.gradient(u) ** 2, axis=0))) ** 2
    lower = math.exp(-eps * m) * g.l2_norm(u) ** 2 + eps * grad2
    assert g.inner(u, apply_M(g, phi, u, eps)) >= lower * (1 - 1e-12)


def test_invert_M_diagonal_case():
    g = make_grid(1, [64], [2 * np.pi])
    x = g.axis_coords(0)
    u = invert_M(g, np.zeros(64), np.cos(3 * x), 0.5)
    assert np.max(np.abs(u - np.cos(3 * x) / (0.5 * 9 + 1))) < 1e-11


def test_invert_M_round_trip(grid):
    rng = np.random.default_rng(7)
    phi = random_smooth_field(grid, rng, amplitude=2.0)
    u0 = random_smooth_field(grid, rng)
    for eps in (1.0, 0.1):
        u = invert_M(grid, phi, apply_M(grid, phi, u0, eps), eps, SolverConfig(tol=1e-12))
        assert grid.l2_norm(u - u0) <= 1e-9


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), eps=st.sampled_from([1.0, 0.1, 0.01]))
def test_invert_M_squared_estimate(seed, eps):
    # exp(-eps|phi|)|u|^2 + eps|grad u|^2 <= exp(eps|phi|)|v|^2
    g = make_grid(2, [32, 32], [10.0, 10.0])
    rng = np.random.default_rng(seed)
    phi = random_smooth_field(g, rng, amplitude=2.0)
    v = random_smooth_field(g, rng, corr_length=0.5)
    u = invert_M(g, phi, v, eps, SolverConfig(tol=1e-12))
    m = np.max(np.abs(phi))
    grad2 = g.l2_norm(np.sqrt(np.sum(g.gradient(u) ** 2, axis=0))) ** 2
    lhs = math.exp(-eps * m) * g.l2_norm(u) ** 2 + eps * grad2
    assert lhs <= math.exp(eps * m) * g.l2_norm(v) ** 2 * (1 + 1e-10)


def test_unsquared_estimate_counterexample():
    # phi = 0, eps = 1, one Fourier mode at |k| = sqrt(2) - 1
    k = math.sqrt(2) - 1
    L = 2 * np.pi / k
    g = make_grid(1, [64], [L])
    v = np.cos(k * g.axis_coords(0))
    u = invert_M(g, np.zeros(64), v, 1.0, SolverConfig(tol=1e-13))
    lhs = g.l2_norm(u) + g.l2_norm(g.derivative(u, 0))
    assert lhs / g.l2_norm(v) == pytest.approx((1 + k) / (1 + k * k), rel=1e-9)
    assert lhs > g.l2_norm(v)
