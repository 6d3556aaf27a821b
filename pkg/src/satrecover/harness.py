"""Reproducible RRMSE sweeps over measurements, sparsity, noise and saturation.

Every (axis value, trial) cell derives its RNG seed from the base seed and
the cell coordinates, so adding grid points or estimators never perturbs
existing cells, and re-running an identical spec reproduces the records
bitwise. Wall-clock timings are kept on the in-memory records; the canonical
records.csv leaves the wall_ms column empty unless timing output is
explicitly requested, because timings are the one non-deterministic field.
"""

import csv
import hashlib
import time
from dataclasses import dataclass

import numpy as np

from .estimators import EstimatorError, EstimatorSpec, recover
from .model import calibrate_tau, gen_sensing, gen_signal, measure, rrmse, zeta

AXES = ("measurements", "sparsity", "noise", "saturation")
ALL_ESTIMATORS = ("LM", "SR", "SC", "SS", "SI")

# experiment defaults: n = 256 DCT-sparse signals, s = 25, m = 150,
# f_sat = 0.15, f_sigma = 0.1, medians over 10 trials
DEFAULTS = {"n": 256, "m": 150, "s": 25, "f_sat": 0.15, "f_sigma": 0.1}


@dataclass
class SweepSpec:
    axis: str
    grid: tuple
    n: int = DEFAULTS["n"]
    m: int = DEFAULTS["m"]
    s: int = DEFAULTS["s"]
    f_sat: float = DEFAULTS["f_sat"]
    f_sigma: float = DEFAULTS["f_sigma"]
    trials: int = 10
    estimators: tuple = ALL_ESTIMATORS
    seed0: int = 0
    basis: str = "dct"
    solver_tol: float = 1e-9
    solver_max_iters: int = 10000

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}")
        if len(self.grid) == 0 or self.trials < 1:
            raise ValueError("grid must be non-empty and trials >= 1")
        bad = set(self.estimators) - set(ALL_ESTIMATORS)
        if bad:
            raise ValueError(f"unknown estimators: {sorted(bad)}")


@dataclass
class SweepRecord:
    axis: str
    axis_value: float
    estimator: str
    trial: int
    seed: int
    rrmse: float
    lambda_used: float
    iters: int
    wall_ms: float
    flag: str = ""


def derive_seed(seed0, *parts) -> int:
    """Stable 63-bit seed from the base seed and cell coordinates."""
    text = "|".join([str(seed0)] + [repr(p) for p in parts])
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def _cell_params(spec: SweepSpec, axis_value):
    n, m, s = spec.n, spec.m, spec.s
    f_sat, f_sigma = spec.f_sat, spec.f_sigma
    if spec.axis == "measurements":
        m = int(axis_value)
    elif spec.axis == "sparsity":
        s = int(round(axis_value * n))
    elif spec.axis == "noise":
        f_sigma = float(axis_value)
    else:
        f_sat = float(axis_value)
    return n, m, s, f_sat, f_sigma


def build_instance(spec: SweepSpec, axis_value, trial):
    """Fresh signal, matrix, noise and threshold for one sweep cell."""
    n, m, s, f_sat, f_sigma = _cell_params(spec, axis_value)
    seed = derive_seed(spec.seed0, spec.axis, axis_value, trial)
    x = gen_signal(n, s, seed=derive_seed(seed, "signal"), basis=spec.basis)
    A = gen_sensing(m, n, seed=derive_seed(seed, "matrix"))
    sigma = f_sigma * zeta(A, x)
    noise_seed = derive_seed(seed, "noise")
    tau = calibrate_tau(A, x, sigma, f_sat, seed=noise_seed)
    meas = measure(A, x, sigma, tau, seed=noise_seed)
    return seed, A, x, meas


def run_sweep(spec: SweepSpec):
    """One SweepRecord per (grid point, estimator, trial), sorted canonically.

    Estimator failures become flagged records instead of crashing the sweep.
    """
    records = []
    for axis_value in spec.grid:
        for trial in range(spec.trials):
            seed, A, x, meas = build_instance(spec, axis_value, trial)
            x_signal = x.to_signal_domain()
            for kind in spec.estimators:
                est_spec = EstimatorSpec(kind=kind, basis=spec.basis)
                t0 = time.perf_counter()
                try:
                    res = recover(est_spec, A, meas, seed=derive_seed(seed, "cv"),
                                  tol=spec.solver_tol,
                                  max_iters=spec.solver_max_iters)
                    wall_ms = 1000.0 * (time.perf_counter() - t0)
                    records.append(SweepRecord(
                        axis=spec.axis, axis_value=float(axis_value),
                        estimator=kind, trial=trial, seed=seed,
                        rrmse=rrmse(x_signal, res.x_hat),
                        lambda_used=res.lambda_used,
                        iters=res.trace.iters, wall_ms=wall_ms))
                except EstimatorError as exc:
                    wall_ms = 1000.0 * (time.perf_counter() - t0)
                    records.append(SweepRecord(
                        axis=spec.axis, axis_value=float(axis_value),
                        estimator=kind, trial=trial, seed=seed,
                        rrmse=float("nan"), lambda_used=float("nan"),
                        iters=0, wall_ms=wall_ms, flag=str(exc)))
    records.sort(key=lambda r: (r.axis_value, r.estimator, r.trial))
    return records


def aggregate(records):
    """Median / mean / quartiles of RRMSE per (axis_value, estimator).

    Flagged failure records never contribute.
    """
    if not records:
        raise ValueError("no records to aggregate")
    cells = {}
    for r in records:
        if r.flag:
            continue
        cells.setdefault((r.axis_value, r.estimator), []).append(r.rrmse)
    rows = []
    for (axis_value, estimator), errs in sorted(cells.items()):
        arr = np.asarray(errs)
        rows.append({
            "axis": records[0].axis,
            "axis_value": axis_value,
            "estimator": estimator,
            "trials": len(arr),
            "median": float(np.median(arr)),
            "mean": float(np.mean(arr)),
            "q25": float(np.percentile(arr, 25)),
            "q75": float(np.percentile(arr, 75)),
        })
    return rows


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_records(records, path, include_timing=False):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["axis", "axis_value", "estimator", "trial", "seed",
                    "rrmse", "lambda", "iters", "wall_ms", "flag"])
        for r in records:
            w.writerow([r.axis, _fmt(r.axis_value), r.estimator, r.trial, r.seed,
                        _fmt(r.rrmse), _fmt(r.lambda_used), r.iters,
                        _fmt(r.wall_ms) if include_timing else "", r.flag])


def write_summary(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["axis", "axis_value", "estimator", "trials",
                    "median", "mean", "q25", "q75"])
        for r in rows:
            w.writerow([r["axis"], _fmt(r["axis_value"]), r["estimator"],
                        r["trials"], _fmt(r["median"]), _fmt(r["mean"]),
                        _fmt(r["q25"]), _fmt(r["q75"])])


def read_records(path):
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(SweepRecord(
                axis=row["axis"], axis_value=float(row["axis_value"]),
                estimator=row["estimator"], trial=int(row["trial"]),
                seed=int(row["seed"]),
                rrmse=float(row["rrmse"]) if row["rrmse"] else float("nan"),
                lambda_used=float(row["lambda"]) if row["lambda"] else float("nan"),
                iters=int(row["iters"]),
                wall_ms=float(row["wall_ms"]) if row["wall_ms"] else float("nan"),
                flag=row["flag"]))
    return out


def parse_config(path) -> SweepSpec:
    """Key-value config mirroring SweepSpec: one `key = value` per line,
    '#' comments; grid and estimators are comma-separated lists."""
    kv = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            kv[key.strip()] = value.strip()
    if "axis" not in kv or "grid" not in kv:
        raise ValueError("config must set at least axis and grid")
    kwargs = {"axis": kv.pop("axis"),
              "grid": tuple(float(v) for v in kv.pop("grid").split(","))}
    for key, value in kv.items():
        if key == "estimators":
            kwargs[key] = tuple(v.strip() for v in value.split(","))
        elif key == "basis":
            kwargs[key] = value
        elif key in ("n", "m", "s", "trials", "seed0", "solver_max_iters"):
            kwargs[key] = int(value)
        elif key in ("f_sat", "f_sigma", "solver_tol"):
            kwargs[key] = float(value)
        else:
            raise ValueError(f"unknown config key {key!r}")
    return SweepSpec(**kwargs)
