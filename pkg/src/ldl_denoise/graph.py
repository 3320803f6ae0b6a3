"""Feature-space kNN similarity graph and the label-space alignment term.

The graph stores Gaussian-kernel weights ``exp(-||x_i - x_j||^2 / sigma)``
on the union-symmetrized kNN edge set. The alignment term compares these
weights against the kernel evaluated on the embedded points ``x W`` and is
accumulated only over stored edges, so off-edge zeros of the sparse graph
are never compared against strictly positive kernel values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import BandwidthNonPositive, DimensionMismatch, PatternMismatch


def _values(X):
    return X.values if hasattr(X, "values") else np.asarray(X, dtype=float)


@dataclass(frozen=True)
class SimilarityGraph:
    """Symmetric sparse similarity over instances.

    ``edges`` is CSR with zero diagonal; edge (i, j) is stored iff (j, i)
    is, with equal weight. ``neighbor_lists[i]`` holds the stored column
    indices of row i.
    """

    edges: sparse.csr_matrix
    neighbor_lists: tuple
    sigma: float

    @property
    def n(self):
        return self.edges.shape[0]

    @property
    def num_edges(self):
        # stored entries; each unordered pair counts twice
        return int(self.edges.nnz)

    def edge_arrays(self):
        """Directed edge arrays (i, j, w) in CSR order."""
        coo = self.edges.tocoo()
        return coo.row, coo.col, coo.data


def build_knn_similarity(X, k, sigma):
    """Union-symmetrized kNN graph with Gaussian weights.

    Edge (i, j) is present iff j is among i's k nearest neighbors by
    Euclidean distance or vice versa. Ties are broken toward the lower
    index, so the graph is deterministic given the input row order.
    """
    Xv = _values(X)
    n = Xv.shape[0]
    if sigma <= 0:
        raise BandwidthNonPositive(f"sigma must be > 0, got {sigma}")
    if not 1 <= k <= n - 1:
        raise ValueError(f"need 1 <= k <= n-1, got k={k}, n={n}")

    sq = (Xv * Xv).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (Xv @ Xv.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, np.inf)

    # stable argsort keeps the lower index first on ties
    order = np.argsort(d2, axis=1, kind="stable")[:, :k]
    rows = np.repeat(np.arange(n), k)
    cols = order.ravel()
    adj = sparse.coo_matrix(
        (np.ones(rows.size, dtype=bool), (rows, cols)), shape=(n, n)
    ).tocsr()
    adj = adj.maximum(adj.T)  # union symmetrization
    adj.setdiag(False)
    adj.eliminate_zeros()

    coo = adj.tocoo()
    w = np.exp(-d2[coo.row, coo.col] / sigma)
    edges = sparse.csr_matrix((w, (coo.row, coo.col)), shape=(n, n))
    edges.sort_indices()
    neighbor_lists = tuple(
        edges.indices[edges.indptr[i] : edges.indptr[i + 1]].copy() for i in range(n)
    )
    return SimilarityGraph(edges=edges, neighbor_lists=neighbor_lists, sigma=float(sigma))


def empty_graph(n, sigma):
    """Graph with no edges; the alignment term is identically zero."""
    edges = sparse.csr_matrix((n, n))
    return SimilarityGraph(edges=edges, neighbor_lists=tuple([np.empty(0, dtype=int)] * n), sigma=float(sigma))


def induced_similarity(W, X, graph):
    """Kernel weights of the embedded points on the graph's edge set.

    Entry (i, j) is ``exp(-||(x_i - x_j) W||^2 / sigma)``, evaluated only
    where the feature-space graph has an edge.
    """
    Xv = _values(X)
    W = np.asarray(W, dtype=float)
    if W.shape[0] != Xv.shape[1]:
        raise DimensionMismatch(f"W has {W.shape[0]} rows, X has {Xv.shape[1]} columns")
    if graph.n != Xv.shape[0]:
        raise DimensionMismatch(f"graph has {graph.n} nodes, X has {Xv.shape[0]} rows")
    i, j, _ = graph.edge_arrays()
    diff = (Xv[i] - Xv[j]) @ W
    vals = np.exp(-(diff * diff).sum(axis=1) / graph.sigma)
    out = sparse.csr_matrix(
        (vals, graph.edges.indices.copy(), graph.edges.indptr.copy()), shape=graph.edges.shape
    )
    return out


def graph_term_value(graph, s_tilde):
    """Sum of squared weight gaps over stored edges.

    Each unordered pair is stored twice, matching the Frobenius convention
    for symmetric matrices.
    """
    a = graph.edges
    if (
        s_tilde.shape != a.shape
        or s_tilde.nnz != a.nnz
        or not np.array_equal(s_tilde.indptr, a.indptr)
        or not np.array_equal(s_tilde.indices, a.indices)
    ):
        raise PatternMismatch("similarity matrices have different sparsity patterns")
    diff = a.data - s_tilde.data
    return float(diff @ diff)


def graph_term_grad(W, X, graph):
    """Exact gradient of :func:`graph_term_value` with respect to ``W``.

    Per stored edge: ``2 (s~ - s) * s~ * (-2/sigma) * (x_i-x_j)^T (x_i-x_j) W``.
    """
    Xv = _values(X)
    W = np.asarray(W, dtype=float)
    if W.shape[0] != Xv.shape[1]:
        raise DimensionMismatch(f"W has {W.shape[0]} rows, X has {Xv.shape[1]} columns")
    i, j, s = graph.edge_arrays()
    if i.size == 0:
        return np.zeros_like(W)
    delta = Xv[i] - Xv[j]
    T = delta @ W
    s_tilde = np.exp(-(T * T).sum(axis=1) / graph.sigma)
    coef = 2.0 * (s_tilde - s) * s_tilde * (-2.0 / graph.sigma)
    return delta.T @ (coef[:, None] * T)
