"""Core data model: instances, label distributions, fitted parameters.

All containers are immutable after construction (arrays are marked
read-only), so they can be shared freely across parallel workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    NegativeEntry,
    NonFiniteError,
    RowSumViolation,
    ShapeMismatch,
)

ROW_SUM_TOL = 1e-9
NEGATIVE_CLAMP = 1e-12


def _as_matrix(values, what):
    arr = np.array(values, dtype=float, copy=True)
    if arr.ndim != 2:
        raise ShapeMismatch(f"{what} must be 2-D, got ndim={arr.ndim}")
    return arr


def _freeze(arr):
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class InstanceMatrix:
    """n x d feature matrix; rows are instances, columns are features."""

    values: np.ndarray

    def __post_init__(self):
        arr = _as_matrix(self.values, "instance matrix")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("instance matrix has non-finite entries")
        if arr.shape[0] < 2 or arr.shape[1] < 1:
            raise ShapeMismatch(
                f"instance matrix needs n >= 2 and d >= 1, got {arr.shape}"
            )
        object.__setattr__(self, "values", _freeze(arr))

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class LabelDistributionMatrix:
    """n x q matrix whose rows live on the probability simplex.

    Construct via :func:`validate_distribution_matrix`; direct construction
    runs the same checks.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = _as_matrix(self.values, "label distribution matrix")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("label distribution matrix has non-finite entries")
        low = arr.min(initial=0.0)
        if low < -NEGATIVE_CLAMP:
            i, j = np.unravel_index(np.argmin(arr), arr.shape)
            raise NegativeEntry(
                f"entry ({i},{j}) = {arr[i, j]:.3e} is below -{NEGATIVE_CLAMP:g}"
            )
        # tiny negatives from projection/renormalization are clamped to zero
        np.clip(arr, 0.0, None, out=arr)
        sums = arr.sum(axis=1)
        bad = np.abs(sums - 1.0) > ROW_SUM_TOL
        if np.any(bad):
            i = int(np.argmax(bad))
            raise RowSumViolation(f"row {i} sums to {sums[i]:.12f}, expected 1")
        object.__setattr__(self, "values", _freeze(arr))

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def q(self):
        return self.values.shape[1]


def validate_distribution_matrix(M):
    """Wrap ``M`` as a :class:`LabelDistributionMatrix`, enforcing its invariants.

    Negative entries in ``[-1e-12, 0)`` are clamped to zero; anything more
    negative raises :class:`NegativeEntry`. Rows must sum to 1 within 1e-9.
    Validation is idempotent: re-validating an accepted matrix changes no
    entry.
    """
    if isinstance(M, LabelDistributionMatrix):
        M = M.values
    return LabelDistributionMatrix(M)


@dataclass(frozen=True)
class Model:
    """Fitted parameters: regression weights plus the two noise maps."""

    W: np.ndarray  # d x q regression weights
    P: np.ndarray  # d x q instance-noise coefficients
    Q: np.ndarray  # q x q label-noise coefficients

    def __post_init__(self):
        W = _as_matrix(self.W, "W")
        P = _as_matrix(self.P, "P")
        Q = _as_matrix(self.Q, "Q")
        d, q = W.shape
        if P.shape != (d, q):
            raise DimensionMismatch(f"P shape {P.shape} != W shape {(d, q)}")
        if Q.shape != (q, q):
            raise DimensionMismatch(f"Q shape {Q.shape} != ({q}, {q})")
        for name, arr in (("W", W), ("P", P), ("Q", Q)):
            if not np.all(np.isfinite(arr)):
                raise NonFiniteError(f"{name} has non-finite entries")
        object.__setattr__(self, "W", _freeze(W))
        object.__setattr__(self, "P", _freeze(P))
        object.__setattr__(self, "Q", _freeze(Q))

    @property
    def d(self):
        return self.W.shape[0]

    @property
    def q(self):
        return self.W.shape[1]


@dataclass(frozen=True)
class Hyperparams:
    """Solver knobs. ``mu_growth`` stays at 1.1 unless you know better."""

    alpha: float = 0.05
    beta: float = 0.05
    gamma: float = 0.05
    sigma: float = 0.5
    k_neighbors: int = 10
    mu0: float = 0.1
    mu_max: float = 1e6
    mu_growth: float = 1.1
    tol: float = 1e-6
    max_iter: int = 200
    l21_smooth_eps: float = 1e-8

    def __post_init__(self):
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("alpha, beta, gamma must be >= 0")
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        if self.mu0 <= 0 or self.mu_max <= 0 or self.mu0 > self.mu_max:
            raise ValueError("need 0 < mu0 <= mu_max")
        if self.mu_growth <= 1:
            raise ValueError("mu_growth must be > 1")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.max_iter < 0:
            raise ValueError("max_iter must be >= 0")
        if self.l21_smooth_eps <= 0:
            raise ValueError("l21_smooth_eps must be > 0")


def default_hyperparams(d=None, q=None):
    """Defaults: trade-offs at the grid midpoint 0.05, bandwidth 0.5,
    k = 10 (clamped to n-1 at fit time), penalty schedule 0.1 -> 1e6 x1.1."""
    return Hyperparams()


def zscore_fit(X):
    """Column mean/std for z-scoring; zero-variance columns get std 1 so
    they map to exactly 0."""
    X = np.asarray(X, dtype=float)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    return mean, std


def zscore_apply(X, mean, std):
    return (np.asarray(X, dtype=float) - mean) / std


def zscore(X):
    """Z-score ``X`` per column using its own statistics."""
    mean, std = zscore_fit(X)
    return zscore_apply(X, mean, std)
