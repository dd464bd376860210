"""Command-line interface: dataset generation, fitting, evaluation,
landscape scans, and the EM-vs-SWM robustness comparison.

Exit codes: 0 success, 2 usage or validation error, 3 numeric failure.
All artifacts are byte-identical for identical flags and seeds.
"""

from __future__ import annotations

import json
import sys

import click

from . import datasets, experiments, gmm
from .em import fit_em
from .gmm import InvalidModelError
from .ot1d import sliced_wasserstein
from .swm import DivergenceError, SwmConfig, fit_swm

_SEED = click.IntRange(min=0)


def _load_data(path) -> gmm.Dataset:
    try:
        return datasets.load_csv(path)
    except datasets.CsvParseError as exc:
        raise click.UsageError(str(exc))


def _load_model(path) -> gmm.GmmModel:
    try:
        return gmm.load_model(path)
    except (InvalidModelError, ValueError) as exc:
        raise click.UsageError(f"invalid model file: {exc}")


def _write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


@click.group()
def main():
    """Fit Gaussian mixtures by sliced-Wasserstein minimization or EM."""


@main.command("gen")
@click.option("--dataset", required=True, help="Dataset name (ring-square-line).")
@click.option("--n", required=True, type=click.IntRange(min=1), help="Number of samples.")
@click.option("--seed", required=True, type=_SEED)
@click.option("--noise", default=0.05, show_default=True, type=click.FloatRange(min=0))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def cmd_gen(dataset, n, seed, noise, out):
    """Generate a synthetic dataset as headerless CSV."""
    if dataset != "ring-square-line":
        raise click.UsageError(f"unknown dataset {dataset!r} (expected 'ring-square-line')")
    try:
        data = datasets.gen_ring_square_line(n, seed, noise)
    except ValueError as exc:
        raise click.UsageError(f"invalid --n: {exc}")
    datasets.save_csv(data, out)


@main.command("fit")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--k", required=True, type=click.IntRange(min=1))
@click.option("--method", required=True, type=click.Choice(["swm", "em"]))
@click.option("--seed", required=True, type=_SEED)
@click.option("--projections", type=click.IntRange(min=1), default=None,
              help="Random projections per iteration (swm only).")
@click.option("--iters", type=click.IntRange(min=1), default=None)
@click.option("--lr", type=click.FloatRange(min=0, min_open=True), default=None,
              help="Learning rate (swm only).")
@click.option("--quad", type=click.IntRange(min=2), default=None,
              help="Quadrature nodes per direction (swm only).")
@click.option("--p", type=click.FloatRange(min=1), default=None,
              help="Wasserstein order (swm only).")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), default=None)
def cmd_fit(input_path, k, method, seed, projections, iters, lr, quad, p, out, trace_path):
    """Fit a GMM to a dataset and write the model as JSON."""
    data = _load_data(input_path)
    if k > data.n:
        raise click.UsageError(f"--k {k} exceeds the {data.n} samples in {input_path}")
    if method == "em":
        for flag, value in (("--projections", projections), ("--lr", lr),
                            ("--quad", quad), ("--p", p)):
            if value is not None:
                raise click.UsageError(f"{flag} only applies to --method swm")
    try:
        if method == "swm":
            overrides = {"seed": seed}
            for key, value in (("l", projections), ("iters", iters), ("lr", lr),
                               ("quad_points", quad), ("p", p)):
                if value is not None:
                    overrides[key] = value
            model, trace = fit_swm(data, k, SwmConfig(**overrides))
        else:
            model, trace = fit_em(data, k, iters=iters if iters is not None else 500,
                                  seed=seed)
    except DivergenceError as exc:
        if trace_path is not None and exc.trace is not None:
            exc.trace.to_csv(trace_path)
        click.echo(f"error: fit diverged: {exc}", err=True)
        sys.exit(3)
    gmm.save_model(model, out)
    if trace_path is not None:
        trace.to_csv(trace_path)


@main.command("eval")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--metrics", default="nll,sw", show_default=True,
              help="Comma-separated subset of nll,sw.")
@click.option("--projections", default=500, show_default=True, type=click.IntRange(min=1))
@click.option("--seed", default=0, type=_SEED)
def cmd_eval(model_path, input_path, metrics, projections, seed):
    """Print fit metrics for a model against a dataset as JSON."""
    model = _load_model(model_path)
    data = _load_data(input_path)
    if data.dim != model.dim:
        raise click.UsageError(
            f"model dimension {model.dim} does not match data dimension {data.dim}")
    requested = [m.strip() for m in metrics.split(",") if m.strip()]
    unknown = [m for m in requested if m not in ("nll", "sw")]
    if unknown or not requested:
        raise click.UsageError(f"--metrics must be a subset of nll,sw, got {metrics!r}")
    out = {}
    if "nll" in requested:
        out["nll"] = gmm.nll(model, data)
    if "sw" in requested:
        out["sw"] = sliced_wasserstein(model, data, l=projections, seed=seed)
    click.echo(json.dumps(out))


@main.command("landscape")
@click.option("--scenario", required=True, type=click.Choice(["1", "2"]))
@click.option("--n", required=True, type=click.IntRange(min=1))
@click.option("--grid", required=True, type=click.IntRange(min=2))
@click.option("--seed", required=True, type=_SEED)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def cmd_landscape(scenario, n, grid, seed, out):
    """Scan the NLL and 1-D transport objectives over candidate means."""
    if scenario == "1":
        mu, nll_col, wm_col = experiments.landscape_scenario1(n, grid, seed)
        with open(out, "w") as fh:
            fh.write("mu,nll,wm\n")
            for row in zip(mu, nll_col, wm_col):
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
    else:
        mu1, mu2, nll_col, wm_col = experiments.landscape_scenario2(n, grid, seed)
        with open(out, "w") as fh:
            fh.write("mu1,mu2,nll,wm\n")
            for row in zip(mu1, mu2, nll_col, wm_col):
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


@main.command("compare")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--k", required=True, type=click.IntRange(min=1))
@click.option("--runs", required=True, type=click.IntRange(min=1))
@click.option("--seed", required=True, type=_SEED)
@click.option("--delta", default=0.02, show_default=True,
              type=click.FloatRange(min=0, min_open=True),
              help="Relative NLL margin counted as success.")
@click.option("--iters", type=click.IntRange(min=1), default=None,
              help="Override SWM iterations.")
@click.option("--projections", type=click.IntRange(min=1), default=None,
              help="Override SWM projections per iteration.")
@click.option("--em-iters", type=click.IntRange(min=1), default=500, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def cmd_compare(input_path, k, runs, seed, delta, iters, projections, em_iters, out):
    """Fit EM and SWM from shared seeded inits and report success rates."""
    data = _load_data(input_path)
    if k > data.n:
        raise click.UsageError(f"--k {k} exceeds the {data.n} samples in {input_path}")
    overrides = {}
    if iters is not None:
        overrides["iters"] = iters
    if projections is not None:
        overrides["l"] = projections
    try:
        report = experiments.run_comparison(
            data, k, runs, seed, delta=delta,
            swm_config=SwmConfig(**overrides), em_iters=em_iters)
    except DivergenceError as exc:
        click.echo(f"error: fit diverged: {exc}", err=True)
        sys.exit(3)
    report["input"] = input_path
    _write_json(report, out)


@main.command("sample")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--n", required=True, type=click.IntRange(min=1))
@click.option("--seed", required=True, type=_SEED)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def cmd_sample(model_path, n, seed, out):
    """Draw samples from a model and write them as CSV."""
    model = _load_model(model_path)
    datasets.save_csv(gmm.sample(model, n, seed), out)


if __name__ == "__main__":
    main()
