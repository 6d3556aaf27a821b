"""Proximal solvers: the soft-threshold map, monotone FISTA against a plain
ISTA long-run oracle, KKT certificates, and the residual-targeted lambda
search behind the constraint-form estimators."""

import numpy as np
import pytest

from satrecover import (SolverConfig, SolverError, fista, lasso, soft_threshold,
                        solve_residual_constrained)
from satrecover.solvers import kkt_residual, spectral_norm_sq
from util import random_lasso


def ista_oracle(M, y, lam, max_iters=1_000_000, tol=1e-16):
    """Plain proximal gradient (no momentum, fixed step) run to convergence.
    Independent of the FISTA implementation under test."""
    L = np.linalg.norm(M, 2) ** 2
    x = np.zeros(M.shape[1])
    obj_prev = np.inf
    for _ in range(max_iters):
        x = soft_threshold(x - M.T @ (M @ x - y) / L, lam / L)
        obj = 0.5 * np.sum((y - M @ x) ** 2) + lam * np.sum(np.abs(x))
        if obj_prev - obj < tol * max(obj, 1.0):
            break
        obj_prev = obj
    return x, obj


def test_soft_threshold_cases():
    assert np.array_equal(soft_threshold([3.0, -2.0, 0.5], 1.0), [2.0, -1.0, 0.0])
    v = np.array([1.5, -0.2, 0.0])
    assert np.array_equal(soft_threshold(v, 0.0), v)
    rng = np.random.default_rng(0)
    w = rng.standard_normal(50)
    assert np.sum(np.abs(soft_threshold(w, 0.3))) <= np.sum(np.abs(w))
    with pytest.raises(ValueError):
        soft_threshold(v, -0.1)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(lam=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(lam=0.0, tol=0.0)
    with pytest.raises(ValueError):
        SolverConfig(lam=0.0, max_iters=0)
    with pytest.raises(ValueError):
        SolverConfig(lam=0.0, eta=1.0)


def test_fista_1d_closed_form():
    # 0.5 * (1 - x)^2 + 0.5 * |x|  ->  x = soft_threshold(1, 0.5) = 0.5
    value = lambda x: 0.5 * float((1.0 - x[0]) ** 2)
    grad = lambda x: np.array([x[0] - 1.0])
    tr = fista(value, grad, 1, SolverConfig(lam=0.5, tol=1e-14))
    assert tr.converged
    assert tr.x_hat[0] == pytest.approx(0.5, abs=1e-8)


def test_fista_zero_solution_at_large_lambda():
    M, y, _ = random_lasso(20, 30, seed=1)
    lam = float(np.max(np.abs(M.T @ y))) * 1.01
    tr = lasso(M, y, lam, tol=1e-12)
    assert np.all(tr.x_hat == 0.0)
    assert tr.converged


def test_fista_matches_ista_long_run_oracle():
    M, y, _ = random_lasso(20, 40, seed=3)
    lam = 0.05 * float(np.max(np.abs(M.T @ y)))
    tr = lasso(M, y, lam, tol=1e-14)
    _, obj_oracle = ista_oracle(M, y, lam)
    obj_fista = 0.5 * np.sum((y - M @ tr.x_hat) ** 2) + lam * np.sum(np.abs(tr.x_hat))
    assert obj_fista == pytest.approx(obj_oracle, rel=1e-8)


def test_fista_objective_trace_monotone():
    M, y, _ = random_lasso(25, 50, seed=4)
    lam = 0.1 * float(np.max(np.abs(M.T @ y)))
    tr = lasso(M, y, lam, tol=1e-12)
    diffs = np.diff(tr.objective_per_iter)
    assert np.all(diffs <= 1e-12)


def test_fista_kkt_certificate():
    M, y, _ = random_lasso(30, 20, seed=5)
    lam = 0.02 * float(np.max(np.abs(M.T @ y)))
    tr = lasso(M, y, lam, tol=1e-13)
    assert tr.converged
    assert tr.kkt_residual <= 1e-6 * (1.0 + lam)
    # re-derive the residual independently
    g = M.T @ (M @ tr.x_hat - y)
    assert kkt_residual(g, tr.x_hat, lam) == pytest.approx(tr.kkt_residual, rel=1e-12)


def test_kkt_residual_at_exact_solution():
    # 1-d least squares: x* = soft_threshold(y, lam) zeroes the residual
    y, lam = 1.3, 0.4
    x_star = soft_threshold([y], lam)
    g = x_star - y
    assert kkt_residual(g, x_star, lam) <= 1e-15
    assert kkt_residual(np.array([0.3]), np.array([0.0]), 0.5) == 0.0
    assert kkt_residual(np.array([0.7]), np.array([0.0]), 0.5) == pytest.approx(0.2)


def test_fista_raises_on_non_finite():
    value = lambda x: float("nan")
    grad = lambda x: np.array([0.0])
    with pytest.raises(SolverError) as err:
        fista(value, grad, 1, SolverConfig(lam=0.1))
    assert hasattr(err.value, "iterate")


def test_fista_warm_start():
    M, y, _ = random_lasso(20, 30, seed=6)
    lam = 0.05 * float(np.max(np.abs(M.T @ y)))
    cold = lasso(M, y, lam, tol=1e-13)
    warm = lasso(M, y, lam, x0=cold.x_hat, tol=1e-13)
    assert np.allclose(warm.x_hat, cold.x_hat, atol=1e-7)
    assert warm.iters <= cold.iters


def test_spectral_norm_sq():
    rng = np.random.default_rng(2)
    M = rng.standard_normal((15, 10))
    true_sq = np.linalg.norm(M, 2) ** 2
    estimate = spectral_norm_sq(M)
    assert estimate == pytest.approx(true_sq, rel=1e-6)
    assert estimate <= true_sq * (1 + 1e-12)  # power iteration from below
    assert spectral_norm_sq(np.zeros((4, 3))) == 0.0


def test_residual_constrained_lands_in_band():
    M, y, _ = random_lasso(30, 60, seed=7)
    eps = 0.5 * float(np.linalg.norm(y))
    res = solve_residual_constrained(M, y, eps, tol=1e-12)
    assert res.feasible
    assert eps * (1 - 1e-3) <= res.residual <= eps * (1 + 1e-3)
    # the solution's l1 norm is below the unconstrained-data norm benchmark
    assert np.sum(np.abs(res.x)) > 0


def test_residual_constrained_minimizes_l1():
    # compare against direct lambda-grid minimization: no LASSO solution with
    # residual <= eps should have a smaller l1 norm (up to solver slack)
    M, y, _ = random_lasso(25, 15, seed=8)
    eps = 0.4 * float(np.linalg.norm(y))
    res = solve_residual_constrained(M, y, eps, tol=1e-12)
    l1_star = np.sum(np.abs(res.x))
    for lam in np.logspace(-6, 0, 25) * float(np.max(np.abs(M.T @ y))):
        tr = lasso(M, y, lam, tol=1e-12)
        if np.linalg.norm(y - M @ tr.x_hat) <= eps:
            assert np.sum(np.abs(tr.x_hat)) >= l1_star - 1e-6 * (1 + l1_star)


def test_residual_constrained_zero_shortcut():
    M, y, _ = random_lasso(10, 20, seed=9)
    eps = 2.0 * float(np.linalg.norm(y))
    res = solve_residual_constrained(M, y, eps)
    assert res.feasible
    assert np.all(res.x == 0.0)


def test_residual_constrained_infeasible_flagged():
    # y outside the column span and eps below the best achievable residual
    rng = np.random.default_rng(10)
    M = rng.standard_normal((20, 3))
    y = rng.standard_normal(20)
    best = np.linalg.norm(y - M @ np.linalg.lstsq(M, y, rcond=None)[0])
    res = solve_residual_constrained(M, y, 0.5 * best, tol=1e-12)
    assert not res.feasible
    assert res.residual > 0.5 * best


def test_residual_constrained_lam_init_fast_path():
    M, y, _ = random_lasso(30, 60, seed=11)
    eps = 0.5 * float(np.linalg.norm(y))
    base = solve_residual_constrained(M, y, eps, tol=1e-12)
    again = solve_residual_constrained(M, y, eps, tol=1e-12,
                                       lam_init=base.lam, x0=base.x)
    assert again.feasible
    assert again.lam == base.lam
    assert np.allclose(again.x, base.x, atol=1e-6)


def test_residual_constrained_validation():
    M, y, _ = random_lasso(10, 5, seed=12)
    with pytest.raises(ValueError):
        solve_residual_constrained(M, y, 0.0)
