"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import sys

import click
import yaml

from .dataset import DataError, load_csv, save_csv
from .experiments import (CvBenchmarkConfig, MonteCarloConfig,
                          pairwise_from_raw_csv, run_cv_benchmark,
                          run_monte_carlo, write_pairwise_csv)
from .forest import ForestConfig
from .importance import METHODS, measure_importance
from .rng import SeedSpec
from .selection import SELECTORS, run_selector
from .synth import SimulationConfig, gen_simulation


@click.group()
def cli():
    """Random-forest variable importance and feature selection under
    class imbalance."""


@cli.command()
@click.option("--n", type=int, required=True, help="Total sample size.")
@click.option("--ir", type=float, required=True, help="Imbalance ratio n0/n1.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True,
              help="Output CSV path.")
def simulate(n, ir, seed, out_path):
    """Generate one simulated dataset (30 block-structured predictors)."""
    config = SimulationConfig(N=n, IR=ir)
    dataset = gen_simulation(config, SeedSpec(seed))
    save_csv(dataset, out_path)
    click.echo(f"wrote {dataset.n} rows (n0={dataset.n0}, n1={dataset.n1}, "
               f"requested IR={ir:g}, achieved IR={dataset.n0 / dataset.n1:.3g}) "
               f"to {out_path}")


@cli.command()
@click.option("--data", "data_path", type=click.Path(dir_okay=False), required=True)
@click.option("--label", required=True, help="Label column name.")
@click.option("--positive", required=True, help="Label value mapped to class 1.")
@click.option("--method", type=click.Choice(METHODS), required=True)
@click.option("--ntree", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
def importance(data_path, label, positive, method, ntree, seed, out_path):
    """Measure variable importance on a CSV dataset."""
    dataset = load_csv(data_path, label, positive)
    config = ForestConfig(ntree=ntree)
    report = measure_importance(dataset, method, config, SeedSpec(seed))
    report.write_csv(out_path)
    click.echo(f"wrote {len(report.records)} importance records to {out_path}")


@cli.command()
@click.option("--data", "data_path", type=click.Path(dir_okay=False), required=True)
@click.option("--label", required=True)
@click.option("--positive", required=True)
@click.option("--method", type=click.Choice(SELECTORS), required=True)
@click.option("--u", type=float, default=2.0, show_default=True,
              help="CI width multiplier for the search stage.")
@click.option("--ntree", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
def select(data_path, label, positive, method, u, ntree, seed, out_path):
    """Select an optimal feature set."""
    dataset = load_csv(data_path, label, positive)
    config = ForestConfig(ntree=ntree)
    result = run_selector(dataset, method, config, SeedSpec(seed), u=u)
    result.write_json(out_path, dataset.feature_names)
    click.echo(f"{method}: {result.n_candidates} candidates, selected "
               f"{result.selected.size} variables -> {out_path}")


def _load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError:
        raise click.UsageError(f"config file {path} not found")
    except yaml.YAMLError as exc:
        raise click.UsageError(f"cannot parse config {path}: {exc}")
    if not isinstance(data, dict):
        raise click.UsageError(f"config {path} must be a key-value mapping")
    return data


@cli.command("mc-study")
@click.option("--config", "config_path", type=click.Path(dir_okay=False),
              required=True, help="YAML config mirroring MonteCarloConfig.")
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
def mc_study(config_path, out_dir):
    """Run the Monte Carlo importance study."""
    try:
        config = MonteCarloConfig.from_dict(_load_config(config_path))
    except (TypeError, ValueError) as exc:
        raise click.UsageError(f"bad mc-study config: {exc}")
    run_monte_carlo(config, out_dir)
    click.echo(f"wrote reports to {out_dir}")


@cli.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False),
              required=True, help="YAML config mirroring CvBenchmarkConfig.")
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
def benchmark(config_path, out_dir):
    """Run the cross-validated AUC benchmark."""
    try:
        config = CvBenchmarkConfig.from_dict(_load_config(config_path))
    except (TypeError, ValueError) as exc:
        raise click.UsageError(f"bad benchmark config: {exc}")
    run_cv_benchmark(config, out_dir)
    click.echo(f"wrote reports to {out_dir}")


@cli.command()
@click.option("--in", "in_path", type=click.Path(dir_okay=False), required=True,
              help="raw_cv_auc.csv produced by the benchmark command.")
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
def compare(in_path, alpha, out_path):
    """Pairwise method comparison from a benchmark raw report."""
    try:
        rows = pairwise_from_raw_csv(in_path, alpha)
    except FileNotFoundError:
        raise DataError(f"{in_path}: no such file")
    except ValueError as exc:
        raise DataError(str(exc))
    write_pairwise_csv(rows, out_path)
    click.echo(f"wrote {len(rows)} pairwise rows to {out_path}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        return 1
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
