"""Command-line interface.

Subcommands: corrupt, train, evaluate, benchmark, report. Exit codes:
0 success, 1 usage error, 2 data error, 3 solver error, 4 benchmark
finished with failed cells.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import __version__
from .benchmark import run_benchmark, run_sensitivity
from .config import load_config
from .datasets import (
    DatasetManifest,
    load_dataset,
    read_manifest,
    read_matrix_csv,
    write_manifest,
    write_matrix_csv,
)
from .errors import BenchmarkIncomplete, DataError, LdlDenoiseError, SolverError
from .figures import render_report
from .graph import build_knn_similarity
from .kv import write_kv
from .metrics import CSV_HEADER, METRIC_NAMES, csv_row, evaluate_all
from .model_io import load_model, save_model
from .noise import NoiseConfig, corrupt, corruption_manifest
from .solver import fit, predict
from .types import Hyperparams, InstanceMatrix, validate_distribution_matrix, zscore


@click.group(name="ldl-denoise")
@click.version_option(version=__version__)
def cli():
    """Recover label distributions from dependent-noise corruption."""


def _hyper_from_flags(alpha, beta, gamma, sigma, k, tol, max_iter):
    return Hyperparams(
        alpha=alpha, beta=beta, gamma=gamma, sigma=sigma,
        k_neighbors=k, tol=tol, max_iter=max_iter,
    )


@cli.command("corrupt")
@click.argument("dataset_manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--pi", default=0.2, show_default=True, help="Noise rate in [0, 1].")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def cmd_corrupt(dataset_manifest, pi, seed, out_dir):
    """Write a corrupted copy of a dataset plus its provenance manifest."""
    manifest = read_manifest(dataset_manifest)
    X, D, _ = load_dataset(manifest)
    cfg = NoiseConfig(pi=pi, seed=seed)
    omega, _ = corrupt(X, D, cfg)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix_csv(out / "omega.csv", omega)
    write_kv(out / "corruption.txt", corruption_manifest(manifest.name, cfg, omega))
    corrupted = DatasetManifest(
        name=f"{manifest.name}-pi{pi:g}-seed{seed}",
        features_path=manifest.features_path,
        labels_path=str((out / "omega.csv").resolve()),
        n=manifest.n,
        d=manifest.d,
        q=manifest.q,
    )
    write_manifest(corrupted, out / "manifest.txt")
    click.echo(f"wrote {out / 'omega.csv'} ({manifest.n} rows, pi={pi:g}, seed={seed})")


@cli.command("train")
@click.argument("features_csv", type=click.Path(exists=True, dir_okay=False))
@click.argument("omega_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--alpha", default=0.05, show_default=True)
@click.option("--beta", default=0.05, show_default=True)
@click.option("--gamma", default=0.05, show_default=True)
@click.option("--sigma", default=0.5, show_default=True)
@click.option("--k", default=10, show_default=True, help="kNN graph neighbors.")
@click.option("--tol", default=1e-6, show_default=True)
@click.option("--max-iter", default=200, show_default=True)
@click.option("--model-out", required=True, type=click.Path(dir_okay=False))
@click.option("--history-out", type=click.Path(dir_okay=False),
              help="Optional CSV of per-iteration objective/consensus.")
@click.option("--normalize/--no-normalize", default=True, show_default=True,
              help="Z-score feature columns before fitting.")
def cmd_train(features_csv, omega_csv, alpha, beta, gamma, sigma, k, tol, max_iter,
              model_out, history_out, normalize):
    """Fit the solver on (features, corrupted labels) and save the model."""
    X = read_matrix_csv(features_csv)
    if normalize:
        X = zscore(X)
    X = InstanceMatrix(X)
    omega = validate_distribution_matrix(read_matrix_csv(omega_csv))
    hyper = _hyper_from_flags(alpha, beta, gamma, sigma, k, tol, max_iter)
    graph = build_knn_similarity(X, min(hyper.k_neighbors, X.n - 1), hyper.sigma)
    report = fit(X, omega, hyper, graph)
    save_model(report.model, model_out)
    if history_out:
        with open(history_out, "w", encoding="utf-8") as fh:
            fh.write("iteration,objective,consensus\n")
            for i, (obj, cons) in enumerate(
                zip(report.objective_history, report.consensus_history)
            ):
                fh.write(f"{i},{obj:.10g},{cons:.10g}\n")
    click.echo(
        f"iterations={report.iterations} converged={str(report.converged).lower()} "
        f"final_objective={report.final_objective:.10g}"
    )


@cli.command("evaluate")
@click.argument("model_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("features_csv", type=click.Path(exists=True, dir_okay=False))
@click.argument("labels_csv", type=click.Path(exists=True, dir_okay=False))
@click.option("--report-out", type=click.Path(dir_okay=False),
              help="CSV to append the result row to (header added when new).")
@click.option("--dataset", default="dataset", show_default=True)
@click.option("--method", default="ldl-denoise", show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--pi", default=0.0, show_default=True)
@click.option("--normalize/--no-normalize", default=True, show_default=True)
def cmd_evaluate(model_file, features_csv, labels_csv, report_out, dataset, method,
                 seed, pi, normalize):
    """Score a model's predictions against true label distributions."""
    model = load_model(model_file)
    X = read_matrix_csv(features_csv)
    if normalize:
        X = zscore(X)
    truth = validate_distribution_matrix(read_matrix_csv(labels_csv))
    pred = predict(model, X)
    report = evaluate_all(truth, pred)
    for name in METRIC_NAMES:
        click.echo(f"{name} = {getattr(report, name):.10g}")
    if report_out:
        path = Path(report_out)
        line = csv_row(dataset, method, seed, pi, report)
        if path.exists():
            with open(path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
        else:
            path.write_text(CSV_HEADER + "\n" + line + "\n")


@cli.command("benchmark")
@click.argument("config_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--jobs", default=1, show_default=True, type=int)
@click.option("--pi", type=float, help="Override noise_rates with one value.")
@click.option("--seed", type=str, help="Override seeds (comma-separated).")
@click.option("--alpha", type=str, help="Override alpha_grid (comma-separated).")
@click.option("--beta", type=str, help="Override beta_grid (comma-separated).")
@click.option("--gamma", type=str, help="Override gamma_grid (comma-separated).")
@click.option("--sigma", type=str, help="Override sigma_grid (comma-separated).")
@click.option("--k", type=int, help="Override k_neighbors.")
@click.option("--tol", type=float, help="Override solver tolerance.")
@click.option("--max-iter", type=int, help="Override max iterations.")
@click.option("--sensitivity", is_flag=True,
              help="Emit KL-vs-parameter sweep tables instead of the full benchmark.")
def cmd_benchmark(config_file, out_dir, jobs, pi, seed, alpha, beta, gamma, sigma,
                  k, tol, max_iter, sensitivity):
    """Run the full experiment grid described by a config file."""

    def _floats(text):
        return tuple(float(t) for t in text.split(",") if t.strip()) if text else None

    overrides = {
        "noise_rates": (pi,) if pi is not None else None,
        "seeds": tuple(int(t) for t in seed.split(",")) if seed else None,
        "alpha_grid": _floats(alpha),
        "beta_grid": _floats(beta),
        "gamma_grid": _floats(gamma),
        "sigma_grid": _floats(sigma),
        "k_neighbors": k,
        "tol": tol,
        "max_iter": max_iter,
    }
    cfg = load_config(config_file, overrides)
    if sensitivity:
        run_sensitivity(cfg, out_dir)
        click.echo(f"sensitivity tables written to {out_dir}")
        return
    result = run_benchmark(cfg, out_dir, jobs=jobs)
    for notice in result.notices:
        click.echo(f"notice: {notice}")
    click.echo(
        f"rows={len(result.rows)} failures={len(result.failures)} "
        f"stats={'written' if result.stats_written else 'skipped'}"
    )
    if result.failures:
        raise BenchmarkIncomplete(f"{len(result.failures)} cells failed; see failures.csv")


@cli.command("report")
@click.argument("benchmark_dir", type=click.Path(exists=True, file_okay=False))
def cmd_report(benchmark_dir):
    """Render figures from a benchmark output directory."""
    written = render_report(benchmark_dir)
    if not written:
        click.echo("nothing to render")
        return
    for path in written:
        click.echo(f"wrote {path}")


def main(argv=None):
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except BenchmarkIncomplete as exc:
        click.echo(f"incomplete benchmark: {exc}", err=True)
        return 4
    except (DataError, click.FileError) as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except SolverError as exc:
        click.echo(f"solver error: {exc}", err=True)
        return 3
    except LdlDenoiseError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
