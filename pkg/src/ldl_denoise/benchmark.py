"""Benchmark harness: corrupt, fit, evaluate, aggregate, compare.

For every (dataset, noise rate, seed) the harness splits the data, z-scores
features with training-split statistics, corrupts the training labels,
fits one model per hyperparameter grid cell, and scores predictions
against the clean test distributions. When the grid has more than one
cell, a fifth of the training split is held out and the cell with the
lowest held-out KL is marked selected; summaries aggregate selected rows.

Everything written under the output directory is byte-deterministic for a
fixed config; wall-clock timestamps go only to ``log.txt``.
"""

from __future__ import annotations

import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .datasets import SplitSpec, load_dataset, read_manifest, split
from .errors import ParseError
from .graph import build_knn_similarity
from .kv import format_kv
from .metrics import LOWER_BETTER, METRIC_NAMES, evaluate_all, per_row
from .noise import NoiseConfig, corrupt
from .solver import fit, predict
from .stats import bonferroni_dunn_cd, cd_groupings, friedman_statistic, rank_matrix, wilcoxon_signed_rank
from .types import Hyperparams, zscore_apply, zscore_fit

RUNS_HEADER = (
    "dataset,method,seed,pi,"
    + ",".join(METRIC_NAMES)
    + ",alpha,beta,gamma,sigma,val_kl,selected,iterations,converged"
)
SUMMARY_HEADER = "dataset,method,metric,mean,std,n"
WILCOXON_HEADER = "metric,control,method,n,statistic,p_value,decision,outcome"
FRIEDMAN_HEADER = "metric,n_datasets,n_methods,chi2,ff,degenerate"


@dataclass(frozen=True)
class RunRow:
    dataset: str
    method: str
    seed: int
    pi: float
    metrics: dict
    alpha: float
    beta: float
    gamma: float
    sigma: float
    val_kl: float  # nan when no selection round was needed
    selected: bool
    iterations: int
    converged: bool

    def to_csv(self):
        vals = ",".join(f"{self.metrics[name]:.10g}" for name in METRIC_NAMES)
        val_kl = "" if np.isnan(self.val_kl) else f"{self.val_kl:.10g}"
        return (
            f"{self.dataset},{self.method},{self.seed},{self.pi:.10g},{vals},"
            f"{self.alpha:.10g},{self.beta:.10g},{self.gamma:.10g},{self.sigma:.10g},"
            f"{val_kl},{int(self.selected)},{self.iterations},{int(self.converged)}"
        )


@dataclass
class BenchmarkResult:
    rows: list
    failures: list  # (dataset, pi, seed, message)
    stats_written: bool
    notices: list


def _hyper_for(cfg, cell):
    alpha, beta, gamma, sigma = cell
    return Hyperparams(
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        sigma=sigma,
        k_neighbors=cfg.k_neighbors,
        tol=cfg.tol,
        max_iter=cfg.max_iter,
    )


def _fit_cell(X_fit, Om_fit, hyper):
    k = min(hyper.k_neighbors, X_fit.shape[0] - 1)
    graph = build_knn_similarity(X_fit, k, hyper.sigma)
    return fit(X_fit, Om_fit, hyper, graph)


def run_one_job(manifest_path, pi, seed, cfg):
    """All grid cells for one (dataset, noise rate, seed).

    Returns (rows, convergence) where convergence is (iteration, objective,
    consensus) triples of the selected cell's fit.
    """
    manifest = read_manifest(manifest_path)
    X_all, D_all, _ = load_dataset(manifest, normalize=False)
    parts = split(X_all.values, D_all.values, SplitSpec(cfg.train_fraction, seed))
    X_train, D_train = parts.train
    X_test, D_test = parts.test
    mean, std = zscore_fit(X_train)
    X_train = zscore_apply(X_train, mean, std)
    X_test = zscore_apply(X_test, mean, std)

    omega_train, _ = corrupt(X_train, D_train, NoiseConfig(pi=pi, seed=seed))
    cells = cfg.grid_cells()
    holdout = X_train.shape[0] // 5
    select = len(cells) > 1 and holdout >= 1
    if select:
        X_fit, Om_fit = X_train[:-holdout], omega_train.values[:-holdout]
        X_val, D_val = X_train[-holdout:], D_train[-holdout:]
    else:
        X_fit, Om_fit = X_train, omega_train.values

    rows, reports = [], []
    for cell in cells:
        hyper = _hyper_for(cfg, cell)
        report = _fit_cell(X_fit, Om_fit, hyper)
        test_report = evaluate_all(D_test, predict(report.model, X_test).values)
        val_kl = float("nan")
        if select:
            val_kl = float(per_row("kl", D_val, predict(report.model, X_val).values).mean())
        rows.append(
            RunRow(
                dataset=manifest.name,
                method=cfg.method_name,
                seed=seed,
                pi=pi,
                metrics=test_report.as_dict(),
                alpha=cell[0],
                beta=cell[1],
                gamma=cell[2],
                sigma=cell[3],
                val_kl=val_kl,
                selected=False,
                iterations=report.iterations,
                converged=report.converged,
            )
        )
        reports.append(report)

    best = 0
    if select:
        best = int(np.argmin([row.val_kl for row in rows]))
    rows[best] = replace(rows[best], selected=True)
    chosen = reports[best]
    convergence = [
        (i, obj, cons)
        for i, (obj, cons) in enumerate(
            zip(chosen.objective_history, chosen.consensus_history)
        )
    ]
    return rows, convergence


def _job_wrapper(args):
    manifest_path, pi, seed, cfg = args
    try:
        return (manifest_path, pi, seed), run_one_job(manifest_path, pi, seed, cfg), None
    except Exception:
        return (manifest_path, pi, seed), None, traceback.format_exc(limit=4)


def _dataset_names(cfg):
    return [read_manifest(path).name for path in cfg.datasets]


def read_score_rows(path):
    """Rows of a score CSV in the shared (dataset, method, seed, pi, six
    metrics) layout; extra columns are ignored."""
    lines = Path(path).read_text().splitlines()
    if not lines:
        return []
    header = lines[0].split(",")
    idx = {name: header.index(name) for name in ("dataset", "method") if name in header}
    if len(idx) != 2:
        raise ParseError(f"{path}: score CSV must have dataset and method columns")
    cols = {}
    for name in METRIC_NAMES:
        if name not in header:
            raise ParseError(f"{path}: score CSV missing metric column {name}")
        cols[name] = header.index(name)
    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        try:
            out.append(
                {
                    "dataset": parts[idx["dataset"]],
                    "method": parts[idx["method"]],
                    **{name: float(parts[cols[name]]) for name in METRIC_NAMES},
                }
            )
        except (ValueError, IndexError) as exc:
            raise ParseError(f"{path}:{lineno}: bad score row: {exc}") from exc
    return out


def aggregate_scores(rows):
    """Mean per (dataset, method, metric) over whatever rows are given."""
    acc = {}
    for row in rows:
        key = (row["dataset"], row["method"])
        acc.setdefault(key, []).append(row)
    return {
        key: {name: float(np.mean([r[name] for r in group])) for name in METRIC_NAMES}
        for key, group in acc.items()
    }


def stats_stage(score_means, control, alpha=0.05):
    """Friedman/Iman-Davenport, critical-difference data, and signed-rank
    comparisons against the control, per metric.

    ``score_means`` maps (dataset, method) to a dict of metric means. Only
    datasets covered by every method participate. Returns (friedman_rows,
    cd_blocks, wilcoxon_rows, notices).
    """
    methods = sorted({m for _, m in score_means})
    datasets = sorted({d for d, _ in score_means})
    notices = []
    if control not in methods:
        return [], [], [], [f"control method {control!r} has no scores; stats skipped"]
    if len(methods) < 2:
        return [], [], [], ["single-method benchmark: CD/Wilcoxon stages skipped"]
    datasets = [d for d in datasets if all((d, m) in score_means for m in methods)]
    if len(datasets) < 2:
        return [], [], [], ["fewer than 2 datasets shared by all methods; stats skipped"]

    K, N = len(methods), len(datasets)
    friedman_rows, cd_blocks, wilcoxon_rows = [], [], []
    for name in METRIC_NAMES:
        direction = "lower-better" if name in LOWER_BETTER else "higher-better"
        scores = np.array(
            [[score_means[(d, m)][name] for m in methods] for d in datasets]
        )
        ranks = rank_matrix(scores, direction)
        chi2, ff = friedman_statistic(ranks)
        friedman_rows.append(
            f"{name},{N},{K},{chi2:.10g},{'inf' if np.isinf(ff) else f'{ff:.10g}'},"
            f"{int(np.isinf(ff))}"
        )
        avg = {m: float(r) for m, r in zip(methods, ranks.ranks.mean(axis=0))}
        try:
            cd = bonferroni_dunn_cd(K, N, alpha)
        except Exception as exc:
            notices.append(f"CD unavailable for {name}: {exc}")
            cd = float("nan")
        within, beyond = ([], [])
        if np.isfinite(cd):
            within, beyond = cd_groupings(avg, cd, control)
        ordered = sorted(methods, key=lambda m: (avg[m], m))
        cd_blocks.append(
            {
                "metric": name,
                "direction": direction,
                "n_datasets": str(N),
                "n_methods": str(K),
                "alpha": f"{alpha:g}",
                "cd": f"{cd:.10g}",
                "control": control,
                "ranks": ", ".join(f"{m}:{avg[m]:.10g}" for m in ordered),
                "within_cd_of_control": ", ".join(within),
                "beyond_cd_of_control": ", ".join(beyond),
            }
        )
        for method in methods:
            if method == control:
                continue
            a = np.array([score_means[(d, control)][name] for d in datasets])
            b = np.array([score_means[(d, method)][name] for d in datasets])
            if N < 3:
                continue
            try:
                res = wilcoxon_signed_rank(a, b)
            except Exception as exc:
                notices.append(f"wilcoxon {control} vs {method} on {name}: {exc}")
                continue
            # direction 'a' means the control has the larger values
            better = res.direction == ("b" if direction == "lower-better" else "a")
            outcome = "win" if better else "loss"
            if res.decision == "retain":
                outcome = "tie"
            wilcoxon_rows.append(
                f"{name},{control},{method},{N},{res.statistic:.10g},"
                f"{res.p_value:.10g},{res.decision},{outcome}"
            )
    return friedman_rows, cd_blocks, wilcoxon_rows, notices


def _write_lines(path, header, lines):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for line in lines:
            fh.write(line + "\n")


def run_benchmark(cfg, out_dir, jobs=1):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    log_lines = [f"{time.strftime('%Y-%m-%dT%H:%M:%S')} benchmark started"]

    jobs_list = [
        (path, pi, seed, cfg)
        for path in cfg.datasets
        for pi in cfg.noise_rates
        for seed in cfg.seeds
    ]
    results = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for key, payload, err in pool.map(_job_wrapper, jobs_list):
                results[key] = (payload, err)
    else:
        for args in jobs_list:
            key, payload, err = _job_wrapper(args)
            results[key] = (payload, err)

    rows, failures = [], []
    convergence_files = {}
    for path, pi, seed, _ in jobs_list:
        payload, err = results[(path, pi, seed)]
        name = read_manifest(path).name
        if err is not None:
            failures.append((name, pi, seed, err.strip().splitlines()[-1]))
            log_lines.append(
                f"{time.strftime('%Y-%m-%dT%H:%M:%S')} FAILED {name} pi={pi} seed={seed}"
            )
            continue
        job_rows, convergence = payload
        rows.extend(job_rows)
        convergence_files[f"{name}_pi{pi:g}_seed{seed}"] = convergence

    rows.sort(key=lambda r: (r.dataset, r.pi, r.seed, r.alpha, r.beta, r.gamma, r.sigma))
    _write_lines(out_dir / "runs.csv", RUNS_HEADER, [r.to_csv() for r in rows])

    # mean +- std per (dataset, metric) over the selected rows
    summary_lines = []
    selected = [r for r in rows if r.selected]
    for dataset in sorted({r.dataset for r in selected}):
        for name in METRIC_NAMES:
            vals = [r.metrics[name] for r in selected if r.dataset == dataset]
            std = float(np.std(vals, ddof=1)) if len(vals) > 1 else 0.0
            summary_lines.append(
                f"{dataset},{cfg.method_name},{name},{float(np.mean(vals)):.10g},"
                f"{std:.10g},{len(vals)}"
            )
    _write_lines(out_dir / "summary.csv", SUMMARY_HEADER, summary_lines)

    conv_dir = out_dir / "convergence"
    conv_dir.mkdir(exist_ok=True)
    for stem, triples in sorted(convergence_files.items()):
        _write_lines(
            conv_dir / f"{stem}.csv",
            "iteration,objective,consensus",
            [f"{i},{obj:.10g},{cons:.10g}" for i, obj, cons in triples],
        )

    own_scores = [
        {"dataset": r.dataset, "method": r.method, **r.metrics} for r in selected
    ]
    extra = []
    for path in cfg.extra_scores:
        extra.extend(read_score_rows(path))
    friedman_rows, cd_blocks, wilcoxon_rows, notices = stats_stage(
        aggregate_scores(own_scores + extra), cfg.method_name, cfg.stats_alpha
    )
    stats_written = bool(friedman_rows)
    if stats_written:
        stats_dir = out_dir / "stats"
        _write_lines(stats_dir / "friedman.csv", FRIEDMAN_HEADER, friedman_rows)
        _write_lines(stats_dir / "wilcoxon.csv", WILCOXON_HEADER, wilcoxon_rows)
        for block in cd_blocks:
            (stats_dir / f"cd_{block['metric']}.txt").write_text(format_kv(block))
    for notice in notices:
        log_lines.append(f"{time.strftime('%Y-%m-%dT%H:%M:%S')} NOTICE {notice}")

    manifest = {
        "datasets": ", ".join(_dataset_names(cfg)),
        "noise_rates": ", ".join(f"{p:g}" for p in cfg.noise_rates),
        "seeds": ", ".join(str(s) for s in cfg.seeds),
        "grid_cells": str(len(cfg.grid_cells())),
        "rows": str(len(rows)),
        "failures": str(len(failures)),
        "stats_stage": "written" if stats_written else "skipped",
        "method": cfg.method_name,
    }
    (out_dir / "manifest.txt").write_text(format_kv(manifest))
    if failures:
        _write_lines(
            out_dir / "failures.csv",
            "dataset,pi,seed,error",
            [f"{d},{p:g},{s},{msg}" for d, p, s, msg in failures],
        )
    log_lines.append(f"{time.strftime('%Y-%m-%dT%H:%M:%S')} benchmark finished")
    (out_dir / "log.txt").write_text("\n".join(log_lines) + "\n")
    return BenchmarkResult(rows=rows, failures=failures, stats_written=stats_written, notices=notices)


def run_sensitivity(cfg, out_dir):
    """KL-vs-parameter tables: sweep each trade-off over its grid while the
    other two sit at their grid midpoints."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grids = {"alpha": cfg.alpha_grid, "beta": cfg.beta_grid, "gamma": cfg.gamma_grid}
    base = {key: grid[len(grid) // 2] for key, grid in grids.items()}
    sigma = cfg.sigma_grid[len(cfg.sigma_grid) // 2]
    pi = cfg.noise_rates[0]

    loaded = {}
    for path in cfg.datasets:
        manifest = read_manifest(path)
        X_all, D_all, _ = load_dataset(manifest, normalize=False)
        loaded[path] = (manifest.name, X_all.values, D_all.values)

    for param, grid in grids.items():
        lines = []
        for path in cfg.datasets:
            name, Xv, Dv = loaded[path]
            for value in grid:
                cell_vals = dict(base)
                cell_vals[param] = value
                kls = []
                for seed in cfg.seeds:
                    parts = split(Xv, Dv, SplitSpec(cfg.train_fraction, seed))
                    X_train, D_train = parts.train
                    X_test, D_test = parts.test
                    mean, std = zscore_fit(X_train)
                    X_train = zscore_apply(X_train, mean, std)
                    X_test = zscore_apply(X_test, mean, std)
                    omega, _ = corrupt(X_train, D_train, NoiseConfig(pi=pi, seed=seed))
                    hyper = _hyper_for(
                        cfg, (cell_vals["alpha"], cell_vals["beta"], cell_vals["gamma"], sigma)
                    )
                    report = _fit_cell(X_train, omega.values, hyper)
                    kls.append(
                        float(per_row("kl", D_test, predict(report.model, X_test).values).mean())
                    )
                std_kl = float(np.std(kls, ddof=1)) if len(kls) > 1 else 0.0
                lines.append(
                    f"{name},{value:.10g},{float(np.mean(kls)):.10g},{std_kl:.10g},{len(kls)}"
                )
        _write_lines(out_dir / f"sensitivity_{param}.csv", "dataset,value,kl_mean,kl_std,n", lines)
