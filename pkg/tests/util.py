"""Shared instance builders for the test suite."""

import numpy as np

from satrecover import calibrate_tau, gen_sensing, gen_signal, measure, zeta


def make_instance(m, n, s, f_sat=0.2, f_sigma=0.1, seed=0, basis="dct"):
    """Signal, matrix and saturated measurements with sigma = f_sigma * zeta."""
    x = gen_signal(n, s, seed=seed, basis=basis)
    A = gen_sensing(m, n, seed=seed + 1)
    sigma = f_sigma * zeta(A, x)
    tau = calibrate_tau(A, x, sigma, f_sat, seed=seed + 2)
    meas = measure(A, x, sigma, tau, seed=seed + 2)
    return A, x, meas


def random_lasso(m, n, seed=0, density=0.2):
    """A least-squares-plus-l1 instance with a planted sparse solution."""
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((m, n)) / np.sqrt(m)
    x0 = np.zeros(n)
    k = max(1, int(density * n))
    idx = rng.choice(n, size=k, replace=False)
    x0[idx] = rng.standard_normal(k)
    y = M @ x0 + 0.05 * rng.standard_normal(m)
    return M, y, x0
