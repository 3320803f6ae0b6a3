"""Render a benchmark output directory into PNG figures.

Consumes the delimited files the benchmark emits (convergence traces,
metric summaries, critical-difference data, sensitivity tables) and writes
one figure per input under ``<out_dir>/figures/``. Rendering is a separate
pass so the benchmark itself stays plot-free.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .kv import read_kv
from .metrics import METRIC_NAMES


def _read_csv_dicts(path):
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:] if line.strip()]


def _render_convergence(csv_path, png_path):
    rows = _read_csv_dicts(csv_path)
    iters = [int(r["iteration"]) for r in rows]
    obj = [float(r["objective"]) for r in rows]
    cons = [float(r["consensus"]) for r in rows]
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.2))
    axes[0].plot(iters, obj, lw=1.5)
    axes[0].set_xlabel("iteration")
    axes[0].set_ylabel("objective")
    axes[0].set_title(csv_path.stem)
    axes[1].semilogy(iters[1:], np.maximum(cons[1:], 1e-16), lw=1.5, color="tab:orange")
    axes[1].set_xlabel("iteration")
    axes[1].set_ylabel("consensus gap")
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def _render_summary(csv_path, png_path):
    rows = _read_csv_dicts(csv_path)
    datasets = sorted({r["dataset"] for r in rows})
    fig, axes = plt.subplots(2, 3, figsize=(12, 6))
    for ax, name in zip(axes.ravel(), METRIC_NAMES):
        means = [
            float(next(r["mean"] for r in rows if r["dataset"] == d and r["metric"] == name))
            for d in datasets
        ]
        stds = [
            float(next(r["std"] for r in rows if r["dataset"] == d and r["metric"] == name))
            for d in datasets
        ]
        xs = np.arange(len(datasets))
        ax.bar(xs, means, yerr=stds, capsize=3, color="tab:blue", alpha=0.8)
        ax.set_xticks(xs)
        ax.set_xticklabels(datasets, rotation=30, ha="right", fontsize=8)
        ax.set_title(name)
    fig.suptitle("test-split metrics (mean ± std over runs)")
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def _render_cd(txt_path, png_path):
    block = read_kv(txt_path)
    pairs = [tok.strip() for tok in block["ranks"].split(",") if tok.strip()]
    methods = [p.split(":")[0] for p in pairs]
    ranks = [float(p.split(":")[1]) for p in pairs]
    cd = float(block["cd"])
    control = block["control"]
    k = len(methods)

    fig, ax = plt.subplots(figsize=(8, 1.2 + 0.4 * k))
    ax.set_xlim(0.5, k + 0.5)
    ax.set_ylim(-k - 1, 2.2)
    ax.spines[["left", "right", "bottom"]].set_visible(False)
    ax.get_yaxis().set_visible(False)
    ax.xaxis.tick_top()
    ax.set_xticks(range(1, k + 1))
    ax.plot([1, k], [0, 0], color="black", lw=1)
    if np.isfinite(cd):
        ax.plot([1, 1 + cd], [1.2, 1.2], color="black", lw=2.5)
        ax.text(1 + cd / 2, 1.45, f"CD = {cd:.3f}", ha="center", fontsize=8)
    base = dict(zip(methods, ranks))[control]
    for i, (m, r) in enumerate(zip(methods, ranks)):
        y = -(i + 1)
        color = "tab:red" if m == control else "black"
        ax.plot([r, r], [0, y], color=color, lw=0.8)
        ax.text(r, y - 0.15, f"{m} ({r:.2f})", ha="center", va="top", fontsize=8, color=color)
    if np.isfinite(cd):
        lo, hi = base - cd, base + cd
        ax.axvspan(max(lo, 0.5), min(hi, k + 0.5), color="tab:red", alpha=0.08)
    ax.set_title(f"{block['metric']} ({block['direction']})", fontsize=10)
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def _render_sensitivity(csv_path, png_path):
    rows = _read_csv_dicts(csv_path)
    datasets = sorted({r["dataset"] for r in rows})
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    for d in datasets:
        sub = [(float(r["value"]), float(r["kl_mean"])) for r in rows if r["dataset"] == d]
        sub.sort()
        ax.plot([v for v, _ in sub], [k for _, k in sub], marker="o", ms=3, label=d)
    ax.set_xscale("log")
    ax.set_xlabel(csv_path.stem.replace("sensitivity_", ""))
    ax.set_ylabel("mean test KL")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def render_report(out_dir):
    """Render every recognized data file under ``out_dir``; returns the
    list of PNG paths written."""
    out_dir = Path(out_dir)
    fig_dir = out_dir / "figures"
    fig_dir.mkdir(parents=True, exist_ok=True)
    written = []

    conv_dir = out_dir / "convergence"
    if conv_dir.is_dir():
        for csv_path in sorted(conv_dir.glob("*.csv")):
            png = fig_dir / f"convergence_{csv_path.stem}.png"
            _render_convergence(csv_path, png)
            written.append(png)

    summary = out_dir / "summary.csv"
    if summary.is_file() and summary.read_text().count("\n") > 1:
        png = fig_dir / "summary_metrics.png"
        _render_summary(summary, png)
        written.append(png)

    stats_dir = out_dir / "stats"
    if stats_dir.is_dir():
        for txt_path in sorted(stats_dir.glob("cd_*.txt")):
            png = fig_dir / f"{txt_path.stem}.png"
            _render_cd(txt_path, png)
            written.append(png)

    for csv_path in sorted(out_dir.glob("sensitivity_*.csv")):
        png = fig_dir / f"{csv_path.stem}.png"
        _render_sensitivity(csv_path, png)
        written.append(png)

    return written
