"""Synthetic signals, Gaussian sensing matrices and saturated measurements.

The measurement model is y_i = clip(A^i x + eta_i, -tau, tau) with
eta_i ~ N(0, sigma^2). Indices with y_i == tau form s_plus, those with
y_i == -tau form s_minus; everything else is non-saturated.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dct, idct


def clip(q, a, b):
    """Saturate q to the interval [a, b]."""
    if not a < b:
        raise ValueError("clip requires a < b")
    return float(np.clip(q, a, b))


def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal type-II DCT analysis matrix Psi (Psi @ Psi.T == I)."""
    return dct(np.eye(n), axis=0, norm="ortho")


@dataclass
class SparseSignal:
    n: int
    basis: str  # 'canonical' or 'dct'
    coeffs: np.ndarray  # length-n coefficient vector, exactly s-sparse
    support: np.ndarray  # sorted indices of the nonzeros

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        self.support = np.asarray(self.support, dtype=int)
        if self.basis not in ("canonical", "dct"):
            raise ValueError(f"unknown basis {self.basis!r}")

    @property
    def s(self) -> int:
        return len(self.support)

    def to_signal_domain(self) -> np.ndarray:
        """Time-domain signal x (synthesis: x = Psi.T theta for the DCT basis)."""
        if self.basis == "canonical":
            return self.coeffs.copy()
        return idct(self.coeffs, norm="ortho")


@dataclass
class SensingMatrix:
    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.atleast_2d(np.asarray(self.entries, dtype=float))

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]


@dataclass
class MeasurementSet:
    y: np.ndarray
    tau: float
    sigma: float
    s_plus: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    s_minus: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.s_plus = np.asarray(self.s_plus, dtype=int)
        self.s_minus = np.asarray(self.s_minus, dtype=int)
        if self.tau <= 0:
            raise ValueError("tau must be positive")

    @property
    def m(self) -> int:
        return len(self.y)

    @property
    def s_ns(self) -> np.ndarray:
        mask = np.ones(self.m, dtype=bool)
        mask[self.s_plus] = False
        mask[self.s_minus] = False
        return np.flatnonzero(mask)

    @property
    def m1(self) -> int:
        return len(self.s_plus)

    @property
    def m2(self) -> int:
        return len(self.s_minus)

    @property
    def m3(self) -> int:
        return self.m - self.m1 - self.m2


def gen_signal(n, s, amplitude_dist="normal", seed=0, basis="dct"):
    """Random s-sparse coefficient vector on a uniformly random support.

    Nonzero amplitudes are standard normal by default; 'uniform' draws
    magnitudes from U(0.5, 1.5) with random signs.
    """
    if not 1 <= s <= n:
        raise ValueError("need 1 <= s <= n")
    rng = np.random.default_rng(seed)
    support = np.sort(rng.choice(n, size=s, replace=False))
    coeffs = np.zeros(n)
    if amplitude_dist == "normal":
        coeffs[support] = rng.standard_normal(s)
    elif amplitude_dist == "uniform":
        coeffs[support] = rng.choice([-1.0, 1.0], size=s) * rng.uniform(0.5, 1.5, size=s)
    else:
        raise ValueError(f"unknown amplitude_dist {amplitude_dist!r}")
    return SparseSignal(n=n, basis=basis, coeffs=coeffs, support=support)


def gen_sensing(m, n, seed=0):
    """m x n matrix with i.i.d. N(0, 1/m) entries (unit expected column norm)."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    rng = np.random.default_rng(seed)
    return SensingMatrix(rng.standard_normal((m, n)) / np.sqrt(m))


def _noisy_projection(A: SensingMatrix, x: SparseSignal, sigma, seed):
    signal = x.to_signal_domain()
    z = A.entries @ signal
    rng = np.random.default_rng(seed)
    eta = sigma * rng.standard_normal(A.m) if sigma > 0 else np.zeros(A.m)
    return z + eta


def measure(A, x, sigma, tau, seed=0):
    """Apply the forward model: project, add noise, clip, partition indices."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if tau <= 0:
        raise ValueError("tau must be positive")
    pre = _noisy_projection(A, x, sigma, seed)
    s_plus = np.flatnonzero(pre > tau)
    s_minus = np.flatnonzero(pre < -tau)
    y = pre.copy()
    y[s_plus] = tau
    y[s_minus] = -tau
    return MeasurementSet(y=y, tau=tau, sigma=sigma, s_plus=s_plus, s_minus=s_minus)


def calibrate_tau(A, x, sigma, f_sat, seed=0):
    """Threshold tau so that exactly ceil(f_sat * m) measurements saturate.

    Uses the realized pre-clipped values for the given seed, so a subsequent
    measure() call with the same seed hits the target count exactly.
    """
    if not 0 <= f_sat < 1:
        raise ValueError("f_sat must be in [0, 1)")
    pre = np.abs(_noisy_projection(A, x, sigma, seed))
    k = int(np.ceil(f_sat * A.m))
    order = np.sort(pre)[::-1]
    if k == 0:
        return float(order[0] * 1.001 + 1e-12)
    if k >= A.m:
        raise ValueError("cannot saturate every measurement with positive tau")
    return float(0.5 * (order[k - 1] + order[k]))


def rrmse(x_true, x_hat):
    """Relative root-mean-squared error ||x_true - x_hat|| / ||x_true||."""
    x_true = np.asarray(x_true, dtype=float)
    x_hat = np.asarray(x_hat, dtype=float)
    if x_true.shape != x_hat.shape:
        raise ValueError("shape mismatch")
    denom = np.linalg.norm(x_true)
    if denom == 0:
        raise ValueError("RRMSE undefined for the zero signal")
    return float(np.linalg.norm(x_true - x_hat) / denom)


def zeta(A: SensingMatrix, x: SparseSignal) -> float:
    """Average absolute noiseless measurement, the sigma scale of the sweeps."""
    return float(np.mean(np.abs(A.entries @ x.to_signal_domain())))


# ---------------------------------------------------------------------------
# JSON instance schema, for replay and for the figures frontend.
#
# {
#   "signal":  {"n": int, "basis": str, "support": [int], "coeffs": [float]},
#   "sensing": {"m": int, "n": int, "entries": [[float]]},
#   "measurements": {"y": [float], "tau": float, "sigma": float,
#                    "s_plus": [int], "s_minus": [int]}
# }
# ---------------------------------------------------------------------------

def instance_to_json(A: SensingMatrix, x: SparseSignal, meas: MeasurementSet) -> str:
    doc = {
        "signal": {
            "n": x.n,
            "basis": x.basis,
            "support": x.support.tolist(),
            "coeffs": x.coeffs.tolist(),
        },
        "sensing": {"m": A.m, "n": A.n, "entries": A.entries.tolist()},
        "measurements": {
            "y": meas.y.tolist(),
            "tau": meas.tau,
            "sigma": meas.sigma,
            "s_plus": meas.s_plus.tolist(),
            "s_minus": meas.s_minus.tolist(),
        },
    }
    return json.dumps(doc, indent=2)


def instance_from_json(text: str):
    doc = json.loads(text)
    x = SparseSignal(
        n=doc["signal"]["n"],
        basis=doc["signal"]["basis"],
        coeffs=np.array(doc["signal"]["coeffs"], dtype=float),
        support=np.array(doc["signal"]["support"], dtype=int),
    )
    A = SensingMatrix(np.array(doc["sensing"]["entries"], dtype=float))
    meas = MeasurementSet(
        y=np.array(doc["measurements"]["y"], dtype=float),
        tau=doc["measurements"]["tau"],
        sigma=doc["measurements"]["sigma"],
        s_plus=np.array(doc["measurements"]["s_plus"], dtype=int),
        s_minus=np.array(doc["measurements"]["s_minus"], dtype=int),
    )
    return A, x, meas
