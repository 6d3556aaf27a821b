"""Censored-Gaussian loss and gradient against independent oracles:
an arbitrary-precision re-implementation, central finite differences, the
deep-saturation Mills asymptote, and direct convexity probes."""

import mpmath as mp
import numpy as np
import pytest

from satrecover import MeasurementSet, eval_grad, eval_loss, eval_loss_batch
from satrecover.objective import eval_objective, evaluate
from util import make_instance

mp.mp.dps = 50


def naive_loss_mp(M, meas, x):
    """High-precision re-implementation of the censored negative
    log-likelihood, written directly from its definition."""

    def log_upper_tail(z):  # log(1 - Phi(z))
        return mp.log(mp.erfc(mp.mpf(z) / mp.sqrt(2)) / 2)

    total = mp.mpf(0)
    Ax = M @ x
    sig = mp.mpf(meas.sigma)
    for i in meas.s_ns:
        total += ((mp.mpf(meas.y[i]) - mp.mpf(Ax[i])) / sig) ** 2 / 2
    for i in meas.s_plus:
        total -= log_upper_tail((mp.mpf(meas.tau) - mp.mpf(Ax[i])) / sig)
    for i in meas.s_minus:
        total -= log_upper_tail(-(mp.mpf(-meas.tau) - mp.mpf(Ax[i])) / sig)
    return total


def test_loss_zero_when_interpolating():
    A, x, _ = make_instance(10, 16, 3, f_sat=0.0, f_sigma=0.1, seed=0)
    xs = x.to_signal_domain()
    meas = MeasurementSet(y=A.entries @ xs, tau=1e9, sigma=0.5)
    assert eval_loss(A, meas, xs) == 0.0
    assert np.allclose(eval_grad(A, meas, xs), 0.0)


def test_loss_single_saturated_at_threshold():
    # one positively saturated row with A x exactly at tau: -log(1 - Phi(0))
    M = np.array([[1.0]])
    meas = MeasurementSet(y=np.array([2.0]), tau=2.0, sigma=0.5,
                          s_plus=np.array([0]))
    assert eval_loss(M, meas, np.array([2.0])) == pytest.approx(np.log(2.0), rel=1e-14)


def test_loss_matches_high_precision_reimplementation():
    rng = np.random.default_rng(42)
    for seed in range(5):
        A, x, meas = make_instance(5, 8, 3, f_sat=0.4, f_sigma=0.2, seed=seed)
        point = x.to_signal_domain() + 0.3 * rng.standard_normal(8)
        ours = eval_loss(A, meas, point)
        reference = float(naive_loss_mp(A.entries, meas, point))
        assert ours == pytest.approx(reference, rel=1e-9)


def test_likelihood_identity_tiny_instance():
    # exp(-loss) * (sigma * sqrt(2 pi))^(-m3) equals the censored likelihood
    A, x, meas = make_instance(4, 6, 2, f_sat=0.5, f_sigma=0.3, seed=3)
    xs = x.to_signal_domain()
    Ax = A.entries @ xs
    sig = mp.mpf(meas.sigma)
    lik = mp.mpf(1)
    for i in meas.s_ns:
        lik *= mp.exp(-((mp.mpf(meas.y[i]) - mp.mpf(Ax[i])) / sig) ** 2 / 2) \
            / (sig * mp.sqrt(2 * mp.pi))
    for i in meas.s_plus:
        lik *= mp.erfc((mp.mpf(meas.tau) - mp.mpf(Ax[i])) / sig / mp.sqrt(2)) / 2
    for i in meas.s_minus:
        lik *= mp.erfc(-(mp.mpf(-meas.tau) - mp.mpf(Ax[i])) / sig / mp.sqrt(2)) / 2
    ours = mp.exp(-mp.mpf(eval_loss(A, meas, xs))) \
        * (sig * mp.sqrt(2 * mp.pi)) ** (-meas.m3)
    assert abs(ours - lik) / lik < mp.mpf(1e-9)


def test_gradient_matches_finite_differences():
    step = 1e-5
    rng = np.random.default_rng(7)
    for seed in range(5):
        A, x, meas = make_instance(10, 16, 4, f_sat=0.3, f_sigma=0.15, seed=seed)
        point = x.to_signal_domain() + 0.2 * rng.standard_normal(16)
        g = eval_grad(A, meas, point)
        for j in range(16):
            e = np.zeros(16)
            e[j] = step
            fd = (eval_loss(A, meas, point + e) - eval_loss(A, meas, point - e)) / (2 * step)
            assert abs(g[j] - fd) <= 1e-5 * max(abs(fd), 1.0)


def test_gradient_deep_saturation_asymptote():
    # sole positively saturated row with A x placed 50 sigma BELOW tau: the
    # Mills hazard g(u) ~ u + 1/u kicks in, so the gradient magnitude is
    # about (|u|/sigma) * ||A^i|| while staying finite
    sigma, tau = 0.2, 1.0
    row = np.array([[0.6, -0.8]])
    meas = MeasurementSet(y=np.array([tau]), tau=tau, sigma=sigma,
                          s_plus=np.array([0]))
    base = np.array([1.0, 1.0])
    x_pt = base * (tau - 50 * sigma) / float((row @ base)[0])
    u = (tau - float((row @ x_pt)[0])) / sigma
    assert u == pytest.approx(50.0)
    g = eval_grad(row, meas, x_pt)
    assert np.all(np.isfinite(g))
    expected = (abs(u) / sigma) * np.linalg.norm(row)
    assert np.linalg.norm(g) == pytest.approx(expected, rel=1e-2)
    assert np.isfinite(eval_loss(row, meas, x_pt))

    # the opposite direction (A x = tau + 50 sigma, a well-explained
    # saturation) must also stay finite, with a vanishing pull
    x_far = base * (tau + 50 * sigma) / float((row @ base)[0])
    g_far = eval_grad(row, meas, x_far)
    assert np.all(np.isfinite(g_far))
    assert np.linalg.norm(g_far) < 1e-100
    assert np.isfinite(eval_loss(row, meas, x_far))


def test_batch_loss_equals_loop():
    A, x, meas = make_instance(12, 10, 3, f_sat=0.3, seed=9)
    rng = np.random.default_rng(1)
    X = x.to_signal_domain()[:, None] + 0.5 * rng.standard_normal((10, 7))
    batch = eval_loss_batch(A, meas, X)
    for k in range(7):
        assert batch[k] == pytest.approx(eval_loss(A, meas, X[:, k]), rel=1e-12)


def test_evaluate_parts_sum():
    A, x, meas = make_instance(12, 10, 3, f_sat=0.3, seed=2)
    ev = evaluate(A, meas, x.to_signal_domain())
    q1, q2, q3 = ev.parts
    assert ev.value == pytest.approx(q1 + q2 + q3, rel=1e-15)
    assert q1 >= 0 and q2 >= 0 and q3 >= 0
    assert np.array_equal(ev.grad, eval_grad(A, meas, x.to_signal_domain()))


def test_objective_adds_penalty():
    A, x, meas = make_instance(12, 10, 3, f_sat=0.3, seed=2)
    pt = x.to_signal_domain()
    loss = eval_loss(A, meas, pt)
    assert eval_objective(A, meas, pt, 0.0) == loss
    lam = 0.7
    assert eval_objective(A, meas, pt, lam) == pytest.approx(
        loss + lam * np.sum(np.abs(pt)), rel=1e-14)
    assert eval_objective(A, meas, pt, lam) >= loss
    with pytest.raises(ValueError):
        eval_objective(A, meas, pt, -1.0)


def test_sigma_validation():
    A, x, meas = make_instance(6, 8, 2, seed=0)
    bad = MeasurementSet(y=meas.y, tau=meas.tau, sigma=0.0,
                         s_plus=meas.s_plus, s_minus=meas.s_minus)
    for fn in (eval_loss, eval_grad):
        with pytest.raises(ValueError):
            fn(A, bad, np.zeros(8))


def test_loss_convex_along_segments():
    rng = np.random.default_rng(11)
    A, x, meas = make_instance(15, 12, 4, f_sat=0.3, seed=5)
    for _ in range(50):
        x1 = rng.standard_normal(12)
        x2 = rng.standard_normal(12)
        t = rng.uniform(0.05, 0.95)
        lhs = eval_loss(A, meas, t * x1 + (1 - t) * x2)
        rhs = t * eval_loss(A, meas, x1) + (1 - t) * eval_loss(A, meas, x2)
        assert lhs <= rhs + 1e-9


def test_saturated_term_decreases_with_pressure():
    # for a positively saturated row, pushing A x upward lowers its loss term
    M = np.array([[1.0]])
    meas = MeasurementSet(y=np.array([1.0]), tau=1.0, sigma=0.4,
                          s_plus=np.array([0]))
    values = [eval_loss(M, meas, np.array([v])) for v in np.linspace(0.0, 3.0, 13)]
    assert all(a > b for a, b in zip(values, values[1:]))
