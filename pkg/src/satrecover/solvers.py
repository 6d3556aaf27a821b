"""FISTA for smooth-plus-l1 objectives, plus a residual-targeted lambda search.

The monotone FISTA variant is used (never accept an iterate that increases
the penalized objective), with backtracking line search on the smooth part.
That matters here because the censored-Gaussian loss has no global Lipschitz
constant: the Mills-ratio curvature grows with saturation depth.
"""

from dataclasses import dataclass, field

import numpy as np


def soft_threshold(v, t):
    """Proximal map of t * ||.||_1: sign(v) * max(|v| - t, 0)."""
    if t < 0:
        raise ValueError("threshold must be >= 0")
    v = np.asarray(v, dtype=float)
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


@dataclass
class SolverConfig:
    lam: float
    max_iters: int = 20000
    tol: float = 1e-10
    l0: float = 1.0  # initial smooth-curvature estimate (backtracking refines it)
    eta: float = 2.0  # backtracking step inflation factor
    fixed_step: bool = False  # if True, never backtrack: step = 1/l0
    x0: np.ndarray | None = None
    kkt_tol: float = 1e-6

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if self.tol <= 0 or self.max_iters < 1 or self.eta <= 1:
            raise ValueError("invalid solver configuration")


@dataclass
class SolveTrace:
    x_hat: np.ndarray
    objective_per_iter: list = field(default_factory=list)
    iters: int = 0
    converged: bool = False
    kkt_residual: float = np.inf


class SolverError(RuntimeError):
    """Non-finite loss or gradient; carries the last iterate."""

    def __init__(self, message, iterate):
        super().__init__(message)
        self.iterate = iterate


def kkt_residual(grad_at_x, x, lam):
    """Max coordinate violation of the l1 subgradient optimality condition."""
    g = np.asarray(grad_at_x, dtype=float)
    x = np.asarray(x, dtype=float)
    zero = x == 0
    viol = np.abs(g + lam * np.sign(x))
    viol[zero] = np.maximum(np.abs(g[zero]) - lam, 0.0)
    return float(np.max(viol)) if len(viol) else 0.0


def fista(value_fn, grad_fn, n, config: SolverConfig) -> SolveTrace:
    """Minimize value_fn(x) + lam * ||x||_1 over R^n.

    value_fn and grad_fn evaluate the smooth part. Deterministic given the
    configuration. Stops when the relative objective decrease stays below
    config.tol for 5 iterations and the KKT certificate holds, or at
    max_iters.
    """
    lam = config.lam
    x = np.zeros(n) if config.x0 is None else np.asarray(config.x0, dtype=float).copy()
    y = x.copy()
    t = 1.0
    L = config.l0

    def penalized(v, smooth=None):
        s = value_fn(v) if smooth is None else smooth
        return s + lam * np.sum(np.abs(v))

    fx = value_fn(x)
    if not np.isfinite(fx):
        raise SolverError("non-finite loss at the initial point", x)
    obj = penalized(x, fx)
    trace = SolveTrace(x_hat=x, objective_per_iter=[obj])
    stall = 0

    for it in range(1, config.max_iters + 1):
        fy = value_fn(y)
        gy = grad_fn(y)
        if not (np.isfinite(fy) and np.all(np.isfinite(gy))):
            raise SolverError(f"non-finite smooth value/gradient at iteration {it}", x)

        while True:
            z = soft_threshold(y - gy / L, lam / L)
            fz = value_fn(z)
            if config.fixed_step:
                break
            d = z - y
            if fz <= fy + gy @ d + 0.5 * L * (d @ d) + 1e-12 * (1 + abs(fy)):
                break
            L *= config.eta

        obj_z = penalized(z, fz)
        if obj_z <= obj:
            # momentum step on the accepted iterate
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            y = z + ((t - 1.0) / t_next) * (z - x)
            rel_dec = (obj - obj_z) / max(abs(obj), 1.0)
            x, obj, t = z, obj_z, t_next
        else:
            # monotone restart: keep x, drop momentum
            y = x.copy()
            t = 1.0
            rel_dec = np.inf  # the restarted step is re-attempted next iteration
        trace.objective_per_iter.append(obj)
        trace.iters = it

        if rel_dec < config.tol:
            stall += 1
        else:
            stall = 0
        if stall >= 5:
            kkt = kkt_residual(grad_fn(x), x, lam)
            if kkt <= config.kkt_tol * (1.0 + lam):
                trace.converged = True
                trace.kkt_residual = kkt
                break
            stall = 0

    trace.x_hat = x
    if not trace.converged:
        trace.kkt_residual = kkt_residual(grad_fn(x), x, lam)
        trace.converged = trace.kkt_residual <= config.kkt_tol * (1.0 + lam)
    return trace


def spectral_norm_sq(M, iters=60, seed=0):
    """||M||_2^2 via power iteration; curvature scale for least-squares losses."""
    M = np.asarray(M, dtype=float)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(M.shape[1])
    v /= np.linalg.norm(v)
    for _ in range(iters):
        w = M.T @ (M @ v)
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        v = w / nw
    return float(v @ (M.T @ (M @ v)))


def lasso(M, y, lam, x0=None, tol=1e-10, max_iters=20000, extra_smooth=None,
          l0=None):
    """FISTA on 0.5 * ||y - M x||^2 + lam * ||x||_1.

    extra_smooth, when given, is a (value_fn, grad_fn, l0_add) triple added to
    the smooth part (used for penalty-continuation constraints). l0 overrides
    the power-iteration curvature estimate when the caller already has it.
    """
    M = np.asarray(M, dtype=float)
    y = np.asarray(y, dtype=float)
    if l0 is None:
        l0 = max(spectral_norm_sq(M), 1e-12)
    if extra_smooth is None:
        value = lambda x: 0.5 * float(np.sum((y - M @ x) ** 2))
        grad = lambda x: M.T @ (M @ x - y)
    else:
        ev, eg, l0_add = extra_smooth
        value = lambda x: 0.5 * float(np.sum((y - M @ x) ** 2)) + ev(x)
        grad = lambda x: M.T @ (M @ x - y) + eg(x)
        l0 += l0_add
    cfg = SolverConfig(lam=lam, tol=tol, max_iters=max_iters, l0=l0, x0=x0)
    return fista(value, grad, M.shape[1], cfg)


@dataclass
class ResidualConstrainedResult:
    x: np.ndarray
    lam: float
    residual: float
    feasible: bool
    trace: SolveTrace


def solve_residual_constrained(A_sub, y_sub, eps, rel_band=1e-3, max_bisect=80,
                               tol=1e-10, extra_smooth=None, x0=None,
                               lam_init=None) -> ResidualConstrainedResult:
    """min ||x||_1 subject to ||y_sub - A_sub x||_2 <= eps.

    Realized by bisection on lambda over LASSO solves: the residual norm of
    the LASSO solution is non-decreasing in lambda, so we shrink lambda until
    the residual lands in [eps*(1-rel_band), eps*(1+rel_band)]. If even the
    (nearly) unregularized solve cannot meet eps, the nearest-feasible
    solution is returned with feasible=False. lam_init, when given, is probed
    first and returned immediately if already in band (cheap re-solves under
    penalty continuation, where the in-band lambda barely moves).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    M = np.asarray(A_sub.entries if hasattr(A_sub, "entries") else A_sub, dtype=float)
    y = np.asarray(y_sub, dtype=float)
    if np.linalg.norm(y) <= eps and extra_smooth is None:
        z = np.zeros(M.shape[1])
        lam_max = float(np.max(np.abs(M.T @ y))) if M.size else 0.0
        return ResidualConstrainedResult(z, lam_max, float(np.linalg.norm(y)), True,
                                         SolveTrace(x_hat=z, converged=True, kkt_residual=0.0))

    grad0 = -(M.T @ y)
    if extra_smooth is not None:
        grad0 = grad0 + extra_smooth[1](np.zeros(M.shape[1]))
    lam_max = float(np.max(np.abs(grad0)))
    lam_lo, lam_hi = 1e-8 * lam_max, lam_max
    lo, hi = eps * (1 - rel_band), eps * (1 + rel_band)

    l0 = max(spectral_norm_sq(M), 1e-12)

    def solve(lam, warm):
        tr = lasso(M, y, lam, x0=warm, tol=tol, extra_smooth=extra_smooth, l0=l0)
        return tr, float(np.linalg.norm(y - M @ tr.x_hat))

    warm = x0
    best = None  # feasible (tr, lam, res) with the largest lambda seen
    if lam_init is not None and lam_lo < lam_init < lam_hi:
        tr, res = solve(lam_init, warm)
        warm = tr.x_hat
        if lo <= res <= hi:
            return ResidualConstrainedResult(tr.x_hat, lam_init, res, True, tr)
        if res > hi:
            lam_hi = lam_init
        else:
            lam_lo = lam_init
            best = (tr, lam_init, res)

    if best is None:
        # no feasible bracket end yet: probe the lambda floor; if even the
        # nearly-unregularized solve misses eps, stop immediately
        tr, res = solve(lam_lo, warm)
        warm = tr.x_hat
        if res > hi:
            return ResidualConstrainedResult(tr.x_hat, lam_lo, res, False, tr)
        if res >= lo:
            return ResidualConstrainedResult(tr.x_hat, lam_lo, res, True, tr)
        best = (tr, lam_lo, res)

    for _ in range(max_bisect):
        if lam_hi / lam_lo < 1 + 1e-12:
            break
        lam_mid = np.sqrt(lam_lo * lam_hi)
        tr, res = solve(lam_mid, warm)
        warm = tr.x_hat
        if lo <= res <= hi:
            return ResidualConstrainedResult(tr.x_hat, lam_mid, res, True, tr)
        if res > hi:
            lam_hi = lam_mid
        else:
            lam_lo = lam_mid
            best = (tr, lam_mid, res)

    tr, lam, res = best
    return ResidualConstrainedResult(tr.x_hat, lam, res, res <= hi, tr)
