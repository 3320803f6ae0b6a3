"""Synthetic corruption with instance- and label-dependent flip rates.

Reproducibility contract: all randomness flows through a counter-based
Philox generator keyed by the seed, split into four documented substreams

    0  per-instance flip rates (truncated normal, batched rejection,
       accepted in draw order)
    1  feature-to-flip map rho1 (standard normal, d x q, row-major)
    2  label-to-flip map rho2 (standard normal, q x q, row-major)
    3  selector uniforms (n x q, row-major; selector = uniform < flip prob)

so identical seeds give bit-identical output on every platform, and rows
could be generated in parallel from per-row substreams without changing
the sequential result.
"""

from __future__ import annotations

from dataclasses import dataclass
from hashlib import blake2b

import numpy as np

from .errors import DegenerateInterval
from .types import LabelDistributionMatrix, validate_distribution_matrix

_STREAM_PHI = 0
_STREAM_RHO1 = 1
_STREAM_RHO2 = 2
_STREAM_SELECTORS = 3


@dataclass(frozen=True)
class NoiseConfig:
    pi: float
    flip_std: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.pi <= 1.0:
            raise ValueError(f"pi must be in [0, 1], got {self.pi}")
        if self.flip_std <= 0:
            raise ValueError("flip_std must be > 0")


@dataclass(frozen=True)
class NoiseDraw:
    """Everything sampled during one corruption, for provenance."""

    phi: np.ndarray  # n, flip rate per instance
    rho1: np.ndarray  # d x q
    rho2: np.ndarray  # q x q
    flip_probs: np.ndarray  # n x q, row i sums to phi_i
    selectors: np.ndarray  # n x q in {0, 1}


def substream(seed, index):
    """Generator for one of the documented substreams."""
    return np.random.Generator(np.random.Philox(key=seed).jumped(index))


def sample_truncated_normal(mean, std, lo, hi, rng):
    """One draw from N(mean, std^2) conditioned on [lo, hi], by rejection."""
    if not lo < hi:
        raise DegenerateInterval(f"need lo < hi, got [{lo}, {hi}]")
    return float(_truncated_normal(1, mean, std, lo, hi, rng)[0])


def _truncated_normal(n, mean, std, lo, hi, rng):
    out = np.empty(n)
    filled = 0
    while filled < n:
        batch = rng.normal(mean, std, size=max(2 * (n - filled), 16))
        ok = batch[(batch >= lo) & (batch <= hi)]
        take = min(ok.size, n - filled)
        out[filled : filled + take] = ok[:take]
        filled += take
    return out


def softmax(v):
    """Exp-normalize with max subtraction; sums to 1 within 1e-12."""
    v = np.asarray(v, dtype=float)
    shifted = v - v.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def corrupt(X, D, cfg):
    """Corrupt a clean label distribution matrix.

    Per instance i: flip-rate phi_i from the truncated normal, flip
    probabilities ``phi_i * softmax(x_i rho1 + d_i rho2)``, independent
    Bernoulli selectors, then ``omega_i = (d_i + sel_i) / (1 + #flips)``.

    Returns the corrupted matrix and the :class:`NoiseDraw` behind it.
    """
    Xv = X.values if hasattr(X, "values") else np.asarray(X, dtype=float)
    Dm = validate_distribution_matrix(D)
    Dv = Dm.values
    if Xv.shape[0] != Dv.shape[0]:
        raise ValueError(f"X has {Xv.shape[0]} rows, D has {Dv.shape[0]}")
    n, d = Xv.shape
    q = Dv.shape[1]

    phi = _truncated_normal(
        n, cfg.pi, cfg.flip_std, 0.0, 1.0, substream(cfg.seed, _STREAM_PHI)
    )
    rho1 = substream(cfg.seed, _STREAM_RHO1).standard_normal((d, q))
    rho2 = substream(cfg.seed, _STREAM_RHO2).standard_normal((q, q))
    flip_probs = phi[:, None] * softmax(Xv @ rho1 + Dv @ rho2)
    u = substream(cfg.seed, _STREAM_SELECTORS).random((n, q))
    selectors = (u < flip_probs).astype(np.int64)

    flips = selectors.sum(axis=1)
    omega = (Dv + selectors) / (1.0 + flips)[:, None]
    draw = NoiseDraw(
        phi=phi, rho1=rho1, rho2=rho2, flip_probs=flip_probs, selectors=selectors
    )
    return LabelDistributionMatrix(omega), draw


def matrix_checksum(M):
    """64-bit hex checksum of a matrix's canonical CSV bytes."""
    M = M.values if hasattr(M, "values") else np.asarray(M, dtype=float)
    text = "\n".join(",".join(f"{v:.17g}" for v in row) for row in M) + "\n"
    return blake2b(text.encode("ascii"), digest_size=8).hexdigest()


def corruption_manifest(dataset_id, cfg, omega):
    """Key-value pairs describing one corrupted dataset, for provenance."""
    return {
        "dataset": dataset_id,
        "pi": repr(cfg.pi),
        "flip_std": repr(cfg.flip_std),
        "seed": str(cfg.seed),
        "omega_checksum": matrix_checksum(omega),
    }
