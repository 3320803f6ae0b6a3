"""Statistical comparison machinery: ranks, Friedman/Iman-Davenport,
Bonferroni-Dunn critical difference, Wilcoxon signed-rank.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats as sps

from .errors import (
    AllZeroDifferences,
    DimensionMismatch,
    NonFiniteScore,
    UnsupportedAlpha,
)

DIRECTIONS = ("lower-better", "higher-better")

_TABLE_PATH = Path(__file__).parent / "data" / "bonferroni_dunn.csv"
_BD_TABLE = None


@dataclass(frozen=True)
class RankMatrix:
    """Per-dataset competition ranks (ties mid-ranked), one row per dataset."""

    ranks: np.ndarray  # N x K
    direction: str


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    decision: str  # "reject" | "retain"
    direction: str  # "a" | "b" | "none", by sign of the median difference


def rank_matrix(scores, direction):
    """Rank each row of an N x K score matrix.

    Parameters
    ----------
    scores : array_like, shape (N, K)
        One row per dataset, one column per algorithm.
    direction : str
        "lower-better" or "higher-better"; rank 1 is always best.

    Returns
    -------
    RankMatrix
        Tied values receive their average rank, so every row sums to
        K(K+1)/2.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.ndim != 2:
        raise DimensionMismatch(f"scores must be 2-D, got ndim={scores.ndim}")
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    if not np.all(np.isfinite(scores)):
        raise NonFiniteScore("score matrix has non-finite entries")
    key = scores if direction == "lower-better" else -scores
    ranks = np.apply_along_axis(sps.rankdata, 1, key)
    return RankMatrix(ranks=ranks, direction=direction)


def friedman_statistic(ranks):
    """Friedman chi-square and its Iman-Davenport F correction.

    Parameters
    ----------
    ranks : RankMatrix or array_like, shape (N, K)

    Returns
    -------
    (chi2, ff) : tuple of float
        ``ff`` is infinite in the degenerate case chi2 == N(K-1)
        (perfectly consistent rankings); callers should flag it.
    """
    R = ranks.ranks if isinstance(ranks, RankMatrix) else np.asarray(ranks, dtype=float)
    N, K = R.shape
    if N < 2 or K < 2:
        raise ValueError(f"need N >= 2 and K >= 2, got N={N}, K={K}")
    mean_ranks = R.mean(axis=0)
    chi2 = 12.0 * N / (K * (K + 1)) * float(((mean_ranks - (K + 1) / 2.0) ** 2).sum())
    denom = N * (K - 1) - chi2
    if denom <= 1e-12:
        return chi2, math.inf
    return chi2, (N - 1) * chi2 / denom


def _bd_table():
    global _BD_TABLE
    if _BD_TABLE is None:
        t05, t10 = {}, {}
        for line in _TABLE_PATH.read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("k,"):
                continue
            k, q05, q10 = line.split(",")
            t05[int(k)] = float(q05)
            t10[int(k)] = float(q10)
        _BD_TABLE = {0.05: t05, 0.10: t10}
    return _BD_TABLE


def bonferroni_dunn_cd(K, N, alpha=0.05):
    """Critical difference ``q_alpha * sqrt(K(K+1) / (6N))`` for comparing
    K algorithms (control included) over N datasets.

    The q table ships with the package; supported alphas are 0.05 and 0.1.
    """
    if K < 2 or N < 1:
        raise ValueError(f"need K >= 2 and N >= 1, got K={K}, N={N}")
    table = _bd_table()
    key = 0.05 if math.isclose(alpha, 0.05) else 0.10 if math.isclose(alpha, 0.1) else None
    if key is None:
        raise UnsupportedAlpha(f"no critical values for alpha={alpha}; use 0.05 or 0.1")
    if K not in table[key]:
        raise ValueError(f"critical-value table covers 2 <= K <= 10, got K={K}")
    return table[key][K] * math.sqrt(K * (K + 1) / (6.0 * N))


def _signed_rank_parts(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatch(f"need equal-length vectors, got {a.shape} and {b.shape}")
    if a.size < 3:
        raise ValueError(f"need at least 3 pairs, got {a.size}")
    diff = a - b
    nz = diff[diff != 0]
    if nz.size == 0:
        raise AllZeroDifferences("all paired differences are zero")
    ranks = sps.rankdata(np.abs(nz))
    w_plus = float(ranks[nz > 0].sum())
    return nz, ranks, w_plus


def _exact_tail_counts(ranks, w_plus):
    # distribution of W+ over all 2^n sign patterns, conditioned on the
    # observed |difference| ranks; mid-ranks are half-integers, so double
    # everything and run an integer subset-sum count
    doubled = np.rint(2.0 * ranks).astype(np.int64)
    total = int(doubled.sum())
    counts = np.zeros(total + 1, dtype=float)
    counts[0] = 1.0
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    w2 = int(round(2.0 * w_plus))
    n_patterns = 2.0 ** len(doubled)
    p_le = counts[: w2 + 1].sum() / n_patterns
    p_ge = counts[w2:].sum() / n_patterns
    return p_le, p_ge


def wilcoxon_signed_rank(a, b, alpha=0.05):
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped. Exact p by full enumeration over sign
    patterns for up to 20 effective pairs; normal approximation with tie
    correction beyond. The reported direction is the sign of the median
    difference ("a" means a > b in medians).

    Returns
    -------
    TestResult
        ``statistic`` is min(W+, W-); ``decision`` is taken at ``alpha``.
    """
    nz, ranks, w_plus = _signed_rank_parts(a, b)
    n = nz.size
    total = float(ranks.sum())
    w_minus = total - w_plus
    if n <= 20:
        p_le, p_ge = _exact_tail_counts(ranks, w_plus)
        p = min(1.0, 2.0 * min(p_le, p_ge))
    else:
        mean = n * (n + 1) / 4.0
        var = n * (n + 1) * (2 * n + 1) / 24.0
        _, tie_counts = np.unique(ranks, return_counts=True)
        var -= float((tie_counts**3 - tie_counts).sum()) / 48.0
        z = (w_plus - mean) / math.sqrt(var)
        p = min(1.0, 2.0 * float(sps.norm.sf(abs(z))))
    med = float(np.median(nz))
    direction = "a" if med > 0 else "b" if med < 0 else "none"
    decision = "reject" if p < alpha else "retain"
    return TestResult(
        statistic=min(w_plus, w_minus), p_value=p, decision=decision, direction=direction
    )


def cd_groupings(method_ranks, cd, control):
    """Split methods by whether their average rank sits within one critical
    difference of the control's.

    Parameters
    ----------
    method_ranks : dict
        Method name -> average rank.
    cd : float
    control : str

    Returns
    -------
    (within, beyond) : tuple of list
        Method names (control excluded), each list sorted by rank.
    """
    if control not in method_ranks:
        raise ValueError(f"control {control!r} not among methods")
    base = method_ranks[control]
    others = sorted(
        (name for name in method_ranks if name != control),
        key=lambda name: (method_ranks[name], name),
    )
    within = [m for m in others if abs(method_ranks[m] - base) < cd]
    beyond = [m for m in others if abs(method_ranks[m] - base) >= cd]
    return within, beyond
