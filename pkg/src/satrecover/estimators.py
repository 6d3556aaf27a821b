"""The five recovery estimators behind one sklearn-style interface.

All of them solve in coefficient space: for DCT-sparse signals the effective
sensing matrix is B = A @ Psi.T, so the l1 penalty acts on the DCT
coefficients and the returned signal is x_hat = Psi.T @ theta_hat.

  LM  likelihood maximization: FISTA on the censored-Gaussian loss + l1
  SR  saturation rejection: min ||theta||_1 s.t. residual on the
      non-saturated rows <= sigma * sqrt(|S_ns|)
  SC  SR plus squared-hinge saturation-consistency penalties with
      continuation on the penalty weight
  SS  saturation sparsity: LASSO on the augmented variable (theta; r) with
      matrix [B | I]
  SI  saturation ignorance: min ||theta||_1 s.t. ||y - B theta||_2 <=
      sigma * sqrt(m), treating clipped values as ordinary measurements
"""

import json
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from . import objective
from .model import MeasurementSet, SensingMatrix, dct_matrix, rrmse
from .solvers import (SolverConfig, SolveTrace, fista, solve_residual_constrained,
                      spectral_norm_sq)


class EstimatorError(RuntimeError):
    pass


@dataclass
class RecoveryResult:
    x_hat: np.ndarray
    theta_hat: np.ndarray
    rrmse: float
    lambda_used: float
    trace: SolveTrace
    seed: int

    def to_json(self) -> str:
        return json.dumps({
            "x_hat": self.x_hat.tolist(),
            "theta_hat": self.theta_hat.tolist(),
            "rrmse": self.rrmse,
            "lambda": self.lambda_used,
            "iterations": self.trace.iters,
            "converged": bool(self.trace.converged),
            "seed": self.seed,
        }, indent=2)


@dataclass
class CrossValResult:
    best_lambda: float
    grid: np.ndarray
    errors: np.ndarray
    fallback: bool = False
    best_theta: np.ndarray | None = None  # winner's fit-set solution (warm start)


@dataclass
class EstimatorSpec:
    kind: str  # LM | SR | SC | SS | SI
    lambda_rule: str = "crossval"  # fixed | crossval (LM and SS only)
    lam: float = 0.0
    grid: np.ndarray | None = None  # default: 15 log-spaced in [1e-4, 1]*lam_max
    holdout_frac: float = 0.3
    sc_penalty_weight: float = 1.0
    basis: str = "dct"

    def __post_init__(self):
        if self.kind not in ("LM", "SR", "SC", "SS", "SI"):
            raise ValueError(f"unknown estimator kind {self.kind!r}")
        if not 0 < self.holdout_frac < 1:
            raise ValueError("holdout_frac must be in (0, 1)")


def effective_matrix(A, basis: str) -> np.ndarray:
    """Sensing matrix composed with the synthesis operator of the basis."""
    M = A.entries if isinstance(A, SensingMatrix) else np.asarray(A, dtype=float)
    if basis == "canonical":
        return M
    if basis == "dct":
        return M @ dct_matrix(M.shape[1]).T
    raise ValueError(f"unknown basis {basis!r}")


def coeffs_to_signal(theta, basis: str) -> np.ndarray:
    if basis == "canonical":
        return np.asarray(theta, dtype=float)
    return dct_matrix(len(theta)).T @ np.asarray(theta, dtype=float)


def _subset(B, meas: MeasurementSet, keep) -> tuple[np.ndarray, MeasurementSet]:
    """Restrict the instance to rows `keep`, remapping the index partition."""
    keep = np.asarray(keep, dtype=int)
    pos = {int(i): j for j, i in enumerate(keep)}
    sub = MeasurementSet(
        y=meas.y[keep], tau=meas.tau, sigma=meas.sigma,
        s_plus=np.array([pos[i] for i in meas.s_plus if i in pos], dtype=int),
        s_minus=np.array([pos[i] for i in meas.s_minus if i in pos], dtype=int),
    )
    return B[keep], sub


def default_lambda_grid(lam_max: float, size: int = 15) -> np.ndarray:
    return lam_max * np.logspace(-4, 0, size)


# ---------------------------------------------------------------------------
# core solves (coefficient space)
# ---------------------------------------------------------------------------

def _lm_solve(B, meas, lam, tol=1e-10, max_iters=20000, x0=None, l0=None,
              kkt_tol=1e-6) -> SolveTrace:
    value = lambda th: objective.eval_loss(B, meas, th)
    grad = lambda th: objective.eval_grad(B, meas, th)
    if l0 is None:
        l0 = max(spectral_norm_sq(B), 1e-12) / meas.sigma**2
    cfg = SolverConfig(lam=lam, tol=tol, max_iters=max_iters, l0=l0, x0=x0,
                       kkt_tol=kkt_tol)
    return fista(value, grad, B.shape[1], cfg)


def _ss_solve(B, meas, lam, tol=1e-10, max_iters=20000, x0=None, l0=None,
              kkt_tol=1e-6) -> SolveTrace:
    m, n = B.shape
    aug = np.hstack([B, np.eye(m)])
    y = meas.y
    value = lambda z: 0.5 * float(np.sum((y - aug @ z) ** 2))
    grad = lambda z: aug.T @ (aug @ z - y)
    if l0 is None:
        l0 = max(spectral_norm_sq(aug), 1e-12)
    cfg = SolverConfig(lam=lam, tol=tol, max_iters=max_iters, l0=l0, x0=x0,
                       kkt_tol=kkt_tol)
    return fista(value, grad, n + m, cfg)


def ss_objective(B, meas, theta, r, lam) -> float:
    """J_ss evaluated at (theta, r); with r = 0 this is SI's penalized form."""
    theta = np.asarray(theta, dtype=float)
    r = np.asarray(r, dtype=float)
    resid = meas.y - B @ theta - r
    return lam * float(np.sum(np.abs(theta)) + np.sum(np.abs(r))) \
        + 0.5 * float(np.sum(resid**2))


def _sc_hinges(B, meas, w):
    """Squared-hinge penalty (value, grad, curvature bound) enforcing
    B_i theta >= tau - 3 sigma on S+ and B_i theta <= -(tau - 3 sigma) on S-."""
    c = meas.tau - 3.0 * meas.sigma
    Bp, Bm = B[meas.s_plus], B[meas.s_minus]

    def value(th):
        vp = np.maximum(0.0, c - Bp @ th)
        vm = np.maximum(0.0, Bm @ th + c)
        return w * float(np.sum(vp**2) + np.sum(vm**2))

    def grad(th):
        vp = np.maximum(0.0, c - Bp @ th)
        vm = np.maximum(0.0, Bm @ th + c)
        return 2.0 * w * (Bm.T @ vm - Bp.T @ vp)

    l0_add = 2.0 * w * (spectral_norm_sq(Bp) + spectral_norm_sq(Bm)) \
        if (len(Bp) or len(Bm)) else 0.0
    return value, grad, l0_add


def _residual_target(meas, rows) -> float:
    """eps = sigma * sqrt(#rows) for the constraint-form baselines.

    At sigma = 0 the constraint degenerates to exact interpolation; a tiny
    positive target keeps the lambda bisection well defined.
    """
    if meas.sigma > 0:
        return meas.sigma * np.sqrt(len(rows))
    return max(1e-8 * float(np.linalg.norm(meas.y[rows])), 1e-12)


def _consistency_solve(B, meas, tol, w0=1.0, max_stages=8, viol_frac=1e-4):
    """Residual-constrained l1 solve on the non-saturated rows, plus
    squared-hinge saturation-consistency penalties driven to feasibility by
    weight continuation. Returns (result, final_weight)."""
    ns = meas.s_ns
    if len(ns) == 0:
        raise EstimatorError("no usable measurements: every row is saturated")
    eps = _residual_target(meas, ns)
    w = w0
    res = None
    warm = None
    lam_init = None
    saturated = bool(meas.m1 or meas.m2)
    for _ in range(max_stages):
        extra = _sc_hinges(B, meas, w) if saturated else None
        res = solve_residual_constrained(B[ns], meas.y[ns], eps, tol=tol,
                                         extra_smooth=extra, x0=warm,
                                         lam_init=lam_init)
        if not saturated:
            break
        if _sc_violation(B, meas, res.x) <= viol_frac * meas.tau:
            break
        warm = res.x
        lam_init = res.lam
        w *= 10.0
    return res, w


def _sc_violation(B, meas, theta) -> float:
    c = meas.tau - 3.0 * meas.sigma
    v = 0.0
    if meas.m1:
        v = max(v, float(np.max(np.maximum(0.0, c - B[meas.s_plus] @ theta))))
    if meas.m2:
        v = max(v, float(np.max(np.maximum(0.0, B[meas.s_minus] @ theta + c))))
    return v


# ---------------------------------------------------------------------------
# cross-validated lambda selection
# ---------------------------------------------------------------------------

def crossval_lambda(spec: EstimatorSpec, A, meas: MeasurementSet, seed=0,
                    tol=1e-10, max_iters=20000) -> CrossValResult:
    """Holdout cross-validation on unsaturated rows.

    The holdout H is drawn from S_ns with |H| = 0.3 * (m - |H|), i.e. 0.3
    times the number of measurements that remain for reconstruction. Each
    grid lambda is fit on the remaining rows and scored by the mean squared
    holdout residual; ties break toward the larger lambda.
    """
    B = effective_matrix(A, spec.basis)
    h = int(round(spec.holdout_frac * meas.m / (1.0 + spec.holdout_frac)))
    h = min(h, meas.m3)
    grid = spec.grid
    if grid is None:
        lam_max = float(np.max(np.abs(B.T @ meas.y)))
        if spec.kind == "LM":
            lam_max /= meas.sigma**2
        grid = default_lambda_grid(lam_max)
    grid = np.sort(np.asarray(grid, dtype=float))
    if len(grid) == 0 or np.any(grid <= 0):
        raise ValueError("lambda grid must be non-empty and positive")
    if h == 0:
        return CrossValResult(best_lambda=float(grid[len(grid) // 2]), grid=grid,
                              errors=np.full(len(grid), np.nan), fallback=True)

    rng = np.random.default_rng(seed)
    holdout = rng.choice(meas.s_ns, size=h, replace=False)
    keep = np.setdiff1d(np.arange(meas.m), holdout)
    B_fit, meas_fit = _subset(B, meas, keep)
    B_h, y_h = B[holdout], meas.y[holdout]

    if spec.kind == "LM":
        l0 = max(spectral_norm_sq(B_fit), 1e-12) / meas.sigma**2
    elif spec.kind == "SS":
        l0 = max(spectral_norm_sq(np.hstack([B_fit, np.eye(len(keep))])), 1e-12)
    else:
        raise ValueError(f"cross-validation not defined for {spec.kind}")

    # walk the grid from the largest lambda down, warm-starting each solve
    # from its sparser predecessor (the standard regularization-path order);
    # selection only needs the holdout-error ordering, so the grid solves run
    # at a looser tolerance than the final fit
    tol = max(tol, 1e-7)
    errors = np.empty(len(grid))
    solutions = [None] * len(grid)
    warm = None
    for k in range(len(grid) - 1, -1, -1):
        lam = grid[k]
        if spec.kind == "LM":
            tr = _lm_solve(B_fit, meas_fit, lam, tol=tol, max_iters=max_iters,
                           x0=warm, l0=l0, kkt_tol=1e-3)
            theta = tr.x_hat
        else:
            tr = _ss_solve(B_fit, meas_fit, lam, tol=tol, max_iters=max_iters,
                           x0=warm, l0=l0, kkt_tol=1e-3)
            theta = tr.x_hat[:B.shape[1]]
        warm = tr.x_hat
        solutions[k] = tr.x_hat
        errors[k] = float(np.sum((y_h - B_h @ theta) ** 2)) / h
    best = len(grid) - 1 - int(np.argmin(errors[::-1]))  # ties -> larger lambda
    return CrossValResult(best_lambda=float(grid[best]), grid=grid, errors=errors,
                          best_theta=solutions[best])


# ---------------------------------------------------------------------------
# sklearn-style estimator classes
# ---------------------------------------------------------------------------

class SaturationRecoveryEstimator(BaseEstimator):
    """Common fit/predict machinery; subclasses implement _solve."""

    kind = None

    def __init__(self, basis="dct", tol=1e-10, max_iters=20000):
        self.basis = basis
        self.tol = tol
        self.max_iters = max_iters

    def _spec(self) -> EstimatorSpec:
        return EstimatorSpec(kind=self.kind, basis=self.basis,
                             lambda_rule=getattr(self, "lambda_rule", "fixed"),
                             lam=getattr(self, "lam", 0.0),
                             grid=getattr(self, "grid", None),
                             holdout_frac=getattr(self, "holdout_frac", 0.3),
                             sc_penalty_weight=getattr(self, "penalty_weight", 1.0))

    def fit(self, A, meas: MeasurementSet, seed=0):
        B = effective_matrix(A, self.basis)
        theta, lam, trace = self._solve(B, meas, seed)
        self.coef_ = theta
        self.x_hat_ = coeffs_to_signal(theta, self.basis)
        self.lambda_used_ = lam
        self.trace_ = trace
        self.seed_ = seed
        return self

    def predict(self, A):
        """Noiseless unclipped measurements of the fitted signal."""
        M = A.entries if isinstance(A, SensingMatrix) else np.asarray(A, dtype=float)
        return M @ self.x_hat_

    def result(self, x_true=None) -> RecoveryResult:
        err = np.nan
        if x_true is not None:
            truth = x_true.to_signal_domain() if hasattr(x_true, "to_signal_domain") \
                else np.asarray(x_true, dtype=float)
            err = rrmse(truth, self.x_hat_)
        return RecoveryResult(x_hat=self.x_hat_, theta_hat=self.coef_, rrmse=err,
                              lambda_used=self.lambda_used_, trace=self.trace_,
                              seed=self.seed_)


class LikelihoodMaxEstimator(SaturationRecoveryEstimator):
    """FISTA on the censored-Gaussian loss with an l1 coefficient penalty."""

    kind = "LM"

    def __init__(self, lambda_rule="crossval", lam=0.0, grid=None,
                 holdout_frac=0.3, basis="dct", tol=1e-10, max_iters=20000):
        super().__init__(basis=basis, tol=tol, max_iters=max_iters)
        self.lambda_rule = lambda_rule
        self.lam = lam
        self.grid = grid
        self.holdout_frac = holdout_frac

    def _solve(self, B, meas, seed):
        if meas.sigma == 0:
            # the censored likelihood degenerates to hard constraints at
            # sigma = 0: interpolate the non-saturated rows, enforce the
            # saturated ones through the consistency hinges
            res, _ = _consistency_solve(B, meas, tol=self.tol)
            return res.x, res.lam, res.trace
        lam = self.lam
        warm = None
        if self.lambda_rule == "crossval":
            # B is already the effective matrix, so run CV in the canonical basis
            spec = self._spec()
            spec.basis = "canonical"
            cv = crossval_lambda(spec, SensingMatrix(B), meas,
                                 seed=seed, tol=self.tol, max_iters=self.max_iters)
            self.cv_ = cv
            lam = cv.best_lambda
            warm = cv.best_theta
        tr = _lm_solve(B, meas, lam, tol=self.tol, max_iters=self.max_iters, x0=warm)
        return tr.x_hat, lam, tr


class SaturationRejection(SaturationRecoveryEstimator):
    """Drop saturated rows, solve the residual-constrained l1 problem."""

    kind = "SR"

    def _solve(self, B, meas, seed):
        ns = meas.s_ns
        if len(ns) == 0:
            raise EstimatorError("no usable measurements: every row is saturated")
        eps = _residual_target(meas, ns)
        res = solve_residual_constrained(B[ns], meas.y[ns], eps, tol=self.tol)
        return res.x, res.lam, res.trace


class SaturationConsistency(SaturationRecoveryEstimator):
    """SR plus squared-hinge consistency penalties with weight continuation."""

    kind = "SC"

    def __init__(self, penalty_weight=1.0, basis="dct", tol=1e-10, max_iters=20000,
                 max_stages=8, violation_tol_frac=1e-4):
        super().__init__(basis=basis, tol=tol, max_iters=max_iters)
        self.penalty_weight = penalty_weight
        self.max_stages = max_stages
        self.violation_tol_frac = violation_tol_frac

    def _solve(self, B, meas, seed):
        res, w = _consistency_solve(B, meas, tol=self.tol, w0=self.penalty_weight,
                                    max_stages=self.max_stages,
                                    viol_frac=self.violation_tol_frac)
        self.final_penalty_weight_ = w
        self.constraint_violation_ = _sc_violation(B, meas, res.x)
        return res.x, res.lam, res.trace


class SaturationSparsity(SaturationRecoveryEstimator):
    """LASSO on (theta; r) with matrix [B | I]; r absorbs saturation error."""

    kind = "SS"

    def __init__(self, lambda_rule="crossval", lam=0.0, grid=None,
                 holdout_frac=0.3, basis="dct", tol=1e-10, max_iters=20000):
        super().__init__(basis=basis, tol=tol, max_iters=max_iters)
        self.lambda_rule = lambda_rule
        self.lam = lam
        self.grid = grid
        self.holdout_frac = holdout_frac

    def _solve(self, B, meas, seed):
        lam = self.lam
        if self.lambda_rule == "crossval":
            spec = self._spec()
            spec.basis = "canonical"
            cv = crossval_lambda(spec, SensingMatrix(B), meas,
                                 seed=seed, tol=self.tol, max_iters=self.max_iters)
            self.cv_ = cv
            lam = cv.best_lambda
        # CV solutions live on the fit-row subset, whose augmented slack block
        # has different length, so the final augmented solve starts cold
        tr = _ss_solve(B, meas, lam, tol=self.tol, max_iters=self.max_iters)
        self.r_hat_ = tr.x_hat[B.shape[1]:]
        return tr.x_hat[:B.shape[1]], lam, tr


class SaturationIgnorance(SaturationRecoveryEstimator):
    """Pretend nothing saturated: residual-constrained l1 on every row."""

    kind = "SI"

    def _solve(self, B, meas, seed):
        eps = _residual_target(meas, np.arange(meas.m))
        res = solve_residual_constrained(B, meas.y, eps, tol=self.tol)
        return res.x, res.lam, res.trace


_CLASSES = {
    "LM": LikelihoodMaxEstimator,
    "SR": SaturationRejection,
    "SC": SaturationConsistency,
    "SS": SaturationSparsity,
    "SI": SaturationIgnorance,
}


def make_estimator(spec: EstimatorSpec, tol=1e-10, max_iters=20000):
    cls = _CLASSES[spec.kind]
    kwargs = {"basis": spec.basis, "tol": tol, "max_iters": max_iters}
    if spec.kind in ("LM", "SS"):
        kwargs.update(lambda_rule=spec.lambda_rule, lam=spec.lam, grid=spec.grid,
                      holdout_frac=spec.holdout_frac)
    if spec.kind == "SC":
        kwargs.update(penalty_weight=spec.sc_penalty_weight)
    return cls(**kwargs)


def recover(spec: EstimatorSpec, A, meas: MeasurementSet, x_true=None, seed=0,
            tol=1e-10, max_iters=20000) -> RecoveryResult:
    """Dispatch one recovery per the estimator spec; inputs are not modified."""
    est = make_estimator(spec, tol=tol, max_iters=max_iters)
    est.fit(A, meas, seed=seed)
    return est.result(x_true)
