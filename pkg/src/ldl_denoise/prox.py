"""Proximal and projection primitives for the alternating solver.

Singular value thresholding (the prox of the nuclear norm), the l2,1 norm
and its IRLS reweighting, and Euclidean projection onto the probability
simplex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SvdFailure


@dataclass(frozen=True)
class SvtResult:
    shrunk: np.ndarray
    rank_after: int
    singular_values_before: np.ndarray  # non-increasing


def svt(A, tau):
    """Singular value thresholding: shrink every singular value by ``tau``.

    Returns the unique minimizer of ``tau * ||Z||_nuc + 0.5 * ||Z - A||_F^2``.
    """
    A = np.asarray(A, dtype=float)
    if tau < 0:
        raise ValueError("tau must be >= 0")
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SvdFailure(f"SVD did not converge on shape {A.shape}") from exc
    shrunk_s = np.maximum(s - tau, 0.0)
    shrunk = (U * shrunk_s) @ Vt
    rank_after = int(np.count_nonzero(s > tau))
    return SvtResult(shrunk=shrunk, rank_after=rank_after, singular_values_before=s)


def nuclear_norm(A):
    """Sum of singular values."""
    try:
        return float(np.linalg.svd(np.asarray(A, dtype=float), compute_uv=False).sum())
    except np.linalg.LinAlgError as exc:
        raise SvdFailure("SVD did not converge") from exc


def l21_norm(A):
    """Sum of row Euclidean norms."""
    A = np.asarray(A, dtype=float)
    return float(np.sqrt((A * A).sum(axis=1)).sum())


def l21_reweight_diag(A, eps):
    """IRLS weights ``1 / (2 * max(||row||, eps))``, one per row.

    The cap at ``eps`` keeps zero rows from producing infinite weights.
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    A = np.asarray(A, dtype=float)
    row_norms = np.sqrt((A * A).sum(axis=1))
    return 1.0 / (2.0 * np.maximum(row_norms, eps))


def project_simplex(v):
    """Euclidean projection of ``v`` onto ``{u : u >= 0, sum(u) = 1}``.

    Sort-and-threshold, O(q log q).
    """
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    j = np.arange(1, v.size + 1)
    active = u - (css - 1.0) / j > 0
    rho = int(np.nonzero(active)[0][-1])
    theta = (css[rho] - 1.0) / (rho + 1)
    return np.maximum(v - theta, 0.0)


def project_rows_to_simplex(M):
    """Row-wise simplex projection (vectorized sort-and-threshold)."""
    M = np.asarray(M, dtype=float)
    n, q = M.shape
    u = np.sort(M, axis=1)[:, ::-1]
    css = np.cumsum(u, axis=1)
    j = np.arange(1, q + 1)
    active = u - (css - 1.0) / j > 0
    # last active index per row
    rho = q - 1 - np.argmax(active[:, ::-1], axis=1)
    theta = (css[np.arange(n), rho] - 1.0) / (rho + 1)
    return np.maximum(M - theta[:, None], 0.0)
