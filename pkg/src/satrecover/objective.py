"""Censored-Gaussian data fidelity, its gradient, and the penalized objective.

The loss splits into three parts:

  q1 = 1/2 sum_{ns} ((y_i - A^i x)/sigma)^2           (plain Gaussian residual)
  q2 = -sum_{S+} log(1 - Phi((tau - A^i x)/sigma))    (positively saturated)
  q3 = -sum_{S-} log Phi((-tau - A^i x)/sigma)        (negatively saturated)

The constant normalization term m3*log(sigma*sqrt(2*pi)) is dropped (it does
not depend on x); exp(-loss) therefore equals the measurement likelihood up
to that constant factor. Saturated terms always go through the log-tail
kernels, never through 1 - Phi in direct arithmetic.
"""

from dataclasses import dataclass

import numpy as np

from .gauss import inverse_mills, log_norm_cdf, log_norm_sf
from .model import MeasurementSet, SensingMatrix


def _rows(A):
    return A.entries if isinstance(A, SensingMatrix) else np.asarray(A, dtype=float)


@dataclass(frozen=True)
class ObjectiveEval:
    value: float
    grad: np.ndarray
    parts: tuple  # (q1, q2, q3)


def _parts(A, meas: MeasurementSet, x):
    if meas.sigma <= 0:
        raise ValueError("sigma must be positive")
    Ax = _rows(A) @ np.asarray(x, dtype=float)
    sig = meas.sigma
    ns = meas.s_ns
    q1 = 0.5 * float(np.sum(((meas.y[ns] - Ax[ns]) / sig) ** 2))
    q2 = -float(np.sum(log_norm_sf((meas.tau - Ax[meas.s_plus]) / sig)))
    q3 = -float(np.sum(log_norm_cdf((-meas.tau - Ax[meas.s_minus]) / sig)))
    return q1, q2, q3


def eval_loss(A, meas: MeasurementSet, x) -> float:
    """Negative censored log-likelihood L(y, Ax; tau), up to a constant."""
    return float(sum(_parts(A, meas, x)))


def eval_loss_batch(A, meas: MeasurementSet, X) -> np.ndarray:
    """Loss for every column of the (n, K) matrix X. Used by the RSC probes."""
    if meas.sigma <= 0:
        raise ValueError("sigma must be positive")
    AX = _rows(A) @ np.asarray(X, dtype=float)  # (m, K)
    sig = meas.sigma
    ns = meas.s_ns
    q1 = 0.5 * np.sum(((meas.y[ns, None] - AX[ns]) / sig) ** 2, axis=0)
    q2 = -np.sum(log_norm_sf((meas.tau - AX[meas.s_plus]) / sig), axis=0)
    q3 = -np.sum(log_norm_cdf((-meas.tau - AX[meas.s_minus]) / sig), axis=0)
    return q1 + q2 + q3


def eval_grad(A, meas: MeasurementSet, x) -> np.ndarray:
    """Gradient of eval_loss with respect to x.

    Saturated rows contribute through inverse Mills ratios:
      -(1/sigma) sum_{S+} A^i * mills_upper((tau - A^i x)/sigma)
      +(1/sigma) sum_{S-} A^i * mills_lower((-tau - A^i x)/sigma)
      -(1/sigma^2) sum_{ns} A^i * (y_i - A^i x)
    """
    if meas.sigma <= 0:
        raise ValueError("sigma must be positive")
    M = _rows(A)
    Ax = M @ np.asarray(x, dtype=float)
    sig = meas.sigma
    ns = meas.s_ns
    g = np.zeros(M.shape[1])
    if len(meas.s_plus):
        u = (meas.tau - Ax[meas.s_plus]) / sig
        g -= M[meas.s_plus].T @ inverse_mills(u, "upper") / sig
    if len(meas.s_minus):
        v = (-meas.tau - Ax[meas.s_minus]) / sig
        g += M[meas.s_minus].T @ inverse_mills(v, "lower") / sig
    if len(ns):
        g -= M[ns].T @ (meas.y[ns] - Ax[ns]) / sig**2
    return g


def evaluate(A, meas: MeasurementSet, x) -> ObjectiveEval:
    q1, q2, q3 = _parts(A, meas, x)
    return ObjectiveEval(value=q1 + q2 + q3, grad=eval_grad(A, meas, x), parts=(q1, q2, q3))


def eval_objective(A, meas: MeasurementSet, x, lam: float) -> float:
    """Full penalized objective lam * ||x||_1 + eval_loss(...)."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    return lam * float(np.sum(np.abs(x))) + eval_loss(A, meas, x)
