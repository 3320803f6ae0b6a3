"""Experiment configuration for the benchmark harness.

Config files use the same ``key = value`` text format as manifests; list
values are comma-separated. Schema (defaults in parentheses)::

    datasets        = toy/manifest.txt, other/manifest.txt   # required
    noise_rates     = 0.2                                    # pi values
    seeds           = 1, 2, 3          # distinct; or runs_per_config = N
    alpha_grid      = 0.05             # trade-off grids, cartesian product
    beta_grid       = 0.05
    gamma_grid      = 0.05
    sigma_grid      = 0.5
    train_fraction  = 0.5
    k_neighbors     = 10               # clamped to n-1 at fit time
    tol             = 1e-6
    max_iter        = 200
    method_name     = ldl-denoise      # label for this method's rows
    extra_scores    =                  # score CSVs of other methods
    stats_alpha     = 0.05

Any key may be overridden by the matching CLI flag.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError
from .kv import read_kv


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple
    noise_rates: tuple = (0.2,)
    seeds: tuple = (1, 2, 3)
    alpha_grid: tuple = (0.05,)
    beta_grid: tuple = (0.05,)
    gamma_grid: tuple = (0.05,)
    sigma_grid: tuple = (0.5,)
    runs_per_config: int = 0  # used to synthesize seeds when none given
    train_fraction: float = 0.5
    k_neighbors: int = 10
    tol: float = 1e-6
    max_iter: int = 200
    method_name: str = "ldl-denoise"
    extra_scores: tuple = ()
    stats_alpha: float = 0.05

    def __post_init__(self):
        if not self.datasets:
            raise ParseError("config needs at least one dataset manifest")
        for grid in (self.alpha_grid, self.beta_grid, self.gamma_grid, self.sigma_grid):
            if not grid:
                raise ParseError("hyperparameter grids must be non-empty")
        if not self.noise_rates:
            raise ParseError("noise_rates must be non-empty")
        if any(not 0.0 <= p <= 1.0 for p in self.noise_rates):
            raise ParseError("noise rates must lie in [0, 1]")
        if len(set(self.seeds)) != len(self.seeds):
            raise ParseError("seeds must be distinct")
        if not self.seeds:
            raise ParseError("need seeds or runs_per_config > 0")

    def grid_cells(self):
        """Cartesian product of the four grids, in deterministic order."""
        return [
            (a, b, g, s)
            for a in self.alpha_grid
            for b in self.beta_grid
            for g in self.gamma_grid
            for s in self.sigma_grid
        ]


def _floats(text):
    return tuple(float(tok) for tok in text.split(",") if tok.strip()) if text else ()


def _ints(text):
    return tuple(int(tok) for tok in text.split(",") if tok.strip()) if text else ()


def _strings(text, base=None):
    items = tuple(tok.strip() for tok in text.split(",") if tok.strip()) if text else ()
    if base is not None:
        items = tuple(str((base / item).resolve()) for item in items)
    return items


def load_config(path, overrides=None):
    """Parse a config file, applying ``overrides`` (already-typed values)."""
    path = Path(path)
    pairs = read_kv(path)
    base = path.parent
    kwargs = {}
    try:
        if "datasets" in pairs:
            kwargs["datasets"] = _strings(pairs["datasets"], base=base)
        if "extra_scores" in pairs:
            kwargs["extra_scores"] = _strings(pairs["extra_scores"], base=base)
        for key in ("noise_rates", "alpha_grid", "beta_grid", "gamma_grid", "sigma_grid"):
            if key in pairs:
                kwargs[key] = _floats(pairs[key])
        if "seeds" in pairs:
            kwargs["seeds"] = _ints(pairs["seeds"])
        if "runs_per_config" in pairs:
            kwargs["runs_per_config"] = int(pairs["runs_per_config"])
        for key, conv in (
            ("train_fraction", float),
            ("k_neighbors", int),
            ("tol", float),
            ("max_iter", int),
            ("stats_alpha", float),
        ):
            if key in pairs:
                kwargs[key] = conv(pairs[key])
        if "method_name" in pairs:
            kwargs["method_name"] = pairs["method_name"]
    except ValueError as exc:
        raise ParseError(f"{path}: bad config value: {exc}") from exc

    unknown = set(pairs) - {
        "datasets", "noise_rates", "seeds", "alpha_grid", "beta_grid", "gamma_grid",
        "sigma_grid", "runs_per_config", "train_fraction", "k_neighbors", "tol",
        "max_iter", "method_name", "extra_scores", "stats_alpha",
    }
    if unknown:
        raise ParseError(f"{path}: unknown config keys {sorted(unknown)}")

    if overrides:
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
    if not kwargs.get("seeds") and kwargs.get("runs_per_config", 0) > 0:
        kwargs["seeds"] = tuple(range(kwargs["runs_per_config"]))
    if "datasets" not in kwargs:
        raise ParseError(f"{path}: config must list datasets")
    return ExperimentConfig(**kwargs)
