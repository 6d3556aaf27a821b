"""Command-line interface: sweep, solve, bound, rsc-check, crossval."""

import json
import pathlib
import sys

import click
import numpy as np

from . import bounds, harness
from .estimators import EstimatorSpec, crossval_lambda, recover
from .model import instance_from_json, instance_to_json


@click.group()
def main():
    """Sparse recovery from saturated compressive measurements."""


@main.command()
@click.option("--axis", type=click.Choice(harness.AXES), default=None)
@click.option("--grid", default=None, help="comma-separated axis values")
@click.option("--n", type=int, default=harness.DEFAULTS["n"])
@click.option("--m", type=int, default=harness.DEFAULTS["m"])
@click.option("--s", type=int, default=harness.DEFAULTS["s"])
@click.option("--fsat", type=float, default=harness.DEFAULTS["f_sat"])
@click.option("--fsigma", type=float, default=harness.DEFAULTS["f_sigma"])
@click.option("--trials", type=int, default=10)
@click.option("--estimators", default=",".join(harness.ALL_ESTIMATORS))
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), default=".", help="output directory")
@click.option("--config", type=click.Path(exists=True), default=None,
              help="key-value config file; command-line flags are ignored")
@click.option("--timing/--no-timing", default=False,
              help="write wall-clock times (makes records.csv non-reproducible)")
def sweep(axis, grid, n, m, s, fsat, fsigma, trials, estimators, seed, out,
          config, timing):
    """Run one experiment sweep and write records.csv + summary.csv."""
    if config is not None:
        spec = harness.parse_config(config)
    else:
        if axis is None or grid is None:
            raise click.UsageError("either --config or both --axis and --grid")
        spec = harness.SweepSpec(
            axis=axis, grid=tuple(float(v) for v in grid.split(",")),
            n=n, m=m, s=s, f_sat=fsat, f_sigma=fsigma, trials=trials,
            estimators=tuple(e.strip() for e in estimators.split(",")),
            seed0=seed)
    outdir = pathlib.Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    records = harness.run_sweep(spec)
    harness.write_records(records, outdir / "records.csv", include_timing=timing)
    harness.write_summary(harness.aggregate(records), outdir / "summary.csv")
    click.echo(f"wrote {len(records)} records to {outdir / 'records.csv'}")


@main.command()
@click.argument("instance", type=click.Path(exists=True))
@click.option("--estimator", type=click.Choice(harness.ALL_ESTIMATORS), default="LM")
@click.option("--lam", type=float, default=None, help="fixed lambda (default: cross-validated)")
@click.option("--basis", type=click.Choice(["dct", "canonical"]), default="dct")
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), default=None, help="result JSON path (default: stdout)")
def solve(instance, estimator, lam, basis, seed, out):
    """Recover a single instance from a JSON file."""
    A, x, meas = instance_from_json(pathlib.Path(instance).read_text())
    rule = "fixed" if lam is not None else "crossval"
    spec = EstimatorSpec(kind=estimator, lambda_rule=rule,
                         lam=lam or 0.0, basis=basis)
    res = recover(spec, A, meas, x_true=x, seed=seed)
    text = res.to_json()
    if out:
        pathlib.Path(out).write_text(text)
    else:
        click.echo(text)


@main.command("gen-instance")
@click.option("--n", type=int, default=harness.DEFAULTS["n"])
@click.option("--m", type=int, default=harness.DEFAULTS["m"])
@click.option("--s", type=int, default=harness.DEFAULTS["s"])
@click.option("--fsat", type=float, default=harness.DEFAULTS["f_sat"])
@click.option("--fsigma", type=float, default=harness.DEFAULTS["f_sigma"])
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), required=True)
def gen_instance(n, m, s, fsat, fsigma, seed, out):
    """Generate one synthetic instance JSON for `solve` / replay."""
    spec = harness.SweepSpec(axis="saturation", grid=(fsat,), n=n, m=m, s=s,
                             f_sigma=fsigma, seed0=seed)
    _, A, x, meas = harness.build_instance(spec, fsat, 0)
    pathlib.Path(out).write_text(instance_to_json(A, x, meas))
    click.echo(f"wrote {out}")


@main.command()
@click.argument("inputs", type=click.Path(exists=True))
def bound(inputs):
    """Reconstruction-error bound from a BoundInputs JSON file."""
    doc = json.loads(pathlib.Path(inputs).read_text())
    b = bounds.BoundInputs(**doc)
    click.echo(json.dumps({"bound": bounds.thm4_bound(b),
                           "bound_appendix": bounds.thm4_bound_appendix(b)}))


@main.command("rsc-check")
@click.argument("instance", type=click.Path(exists=True))
@click.option("--samples", type=int, default=10000)
@click.option("--seed", type=int, default=0)
def rsc_check(instance, samples, seed):
    """Restricted-strong-convexity probe on an instance JSON."""
    A, x, meas = instance_from_json(pathlib.Path(instance).read_text())
    # the loss acts on the signal-domain vector; probe around the true signal
    report = bounds.rsc_check(A.entries, meas, x.to_signal_domain(),
                              samples=samples, seed=seed)
    click.echo(json.dumps({"kappa_hat": report.kappa_hat,
                           "violations": report.violations,
                           "samples": report.samples}))
    if report.violations:
        sys.exit(1)


@main.command()
@click.argument("instance", type=click.Path(exists=True))
@click.option("--estimator", type=click.Choice(["LM", "SS"]), default="LM")
@click.option("--basis", type=click.Choice(["dct", "canonical"]), default="dct")
@click.option("--seed", type=int, default=0)
def crossval(instance, estimator, basis, seed):
    """Cross-validated lambda selection; prints the CV error curve."""
    A, x, meas = instance_from_json(pathlib.Path(instance).read_text())
    spec = EstimatorSpec(kind=estimator, basis=basis)
    cv = crossval_lambda(spec, A, meas, seed=seed)
    click.echo(json.dumps({"best_lambda": cv.best_lambda,
                           "grid": cv.grid.tolist(),
                           "errors": np.asarray(cv.errors).tolist(),
                           "fallback": cv.fallback}))


if __name__ == "__main__":
    main()
