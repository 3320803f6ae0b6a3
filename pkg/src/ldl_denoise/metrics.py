"""The six evaluation measures over (true, predicted) distribution pairs.

Four distances (Chebyshev, Clark, Canberra, Kullback-Leibler) and two
similarities (cosine, intersection). KL is directed: true distribution
first. Denominators and the KL log argument are floored at 1e-12 so that
zeros produced by simplex projection never yield infinities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, UnknownMetric

FLOOR = 1e-12

METRIC_NAMES = ("chebyshev", "clark", "canberra", "kl", "cosine", "intersection")
LOWER_BETTER = frozenset({"chebyshev", "clark", "canberra", "kl"})
HIGHER_BETTER = frozenset({"cosine", "intersection"})


@dataclass(frozen=True)
class MetricReport:
    chebyshev: float
    clark: float
    canberra: float
    kl: float
    cosine: float
    intersection: float
    n_instances: int

    def as_dict(self):
        return {name: getattr(self, name) for name in METRIC_NAMES}

    def to_kv_pairs(self):
        pairs = {name: repr(getattr(self, name)) for name in METRIC_NAMES}
        pairs["n_instances"] = str(self.n_instances)
        return pairs


def _rows(M):
    M = M.values if hasattr(M, "values") else np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[None, :]
    return M


def _chebyshev(D, Dh):
    return np.abs(D - Dh).max(axis=1)


def _clark(D, Dh):
    den = np.maximum(D + Dh, FLOOR)
    return np.sqrt((((D - Dh) / den) ** 2).sum(axis=1))


def _canberra(D, Dh):
    den = np.maximum(D + Dh, FLOOR)
    return (np.abs(D - Dh) / den).sum(axis=1)


def _kl(D, Dh):
    ratio = np.log(np.maximum(D, FLOOR)) - np.log(np.maximum(Dh, FLOOR))
    return np.where(D > 0, D * ratio, 0.0).sum(axis=1)


def _cosine(D, Dh):
    num = (D * Dh).sum(axis=1)
    den = np.linalg.norm(D, axis=1) * np.linalg.norm(Dh, axis=1)
    return num / np.maximum(den, FLOOR)


def _intersection(D, Dh):
    return np.minimum(D, Dh).sum(axis=1)


_PER_ROW = {
    "chebyshev": _chebyshev,
    "clark": _clark,
    "canberra": _canberra,
    "kl": _kl,
    "cosine": _cosine,
    "intersection": _intersection,
}


def metric(name, d, d_hat):
    """One measure between two distribution vectors."""
    if name not in _PER_ROW:
        raise UnknownMetric(f"unknown metric {name!r}; choose from {METRIC_NAMES}")
    d = np.asarray(d, dtype=float)
    d_hat = np.asarray(d_hat, dtype=float)
    if d.shape != d_hat.shape:
        raise DimensionMismatch(f"shapes differ: {d.shape} vs {d_hat.shape}")
    return float(_PER_ROW[name](d[None, :], d_hat[None, :])[0])


def per_row(name, D, D_hat):
    """Vector of per-instance values for one measure."""
    if name not in _PER_ROW:
        raise UnknownMetric(f"unknown metric {name!r}; choose from {METRIC_NAMES}")
    D, Dh = _rows(D), _rows(D_hat)
    if D.shape != Dh.shape:
        raise DimensionMismatch(f"shapes differ: {D.shape} vs {Dh.shape}")
    return _PER_ROW[name](D, Dh)


def evaluate_all(D, D_hat):
    """All six measures averaged over instances."""
    D, Dh = _rows(D), _rows(D_hat)
    if D.shape != Dh.shape:
        raise DimensionMismatch(f"shapes differ: {D.shape} vs {Dh.shape}")
    means = {name: float(fn(D, Dh).mean()) for name, fn in _PER_ROW.items()}
    return MetricReport(n_instances=D.shape[0], **means)


CSV_HEADER = "dataset,method,seed,pi," + ",".join(METRIC_NAMES)


def csv_row(dataset, method, seed, pi, report):
    """One delimited result row matching :data:`CSV_HEADER`."""
    vals = ",".join(f"{getattr(report, name):.10g}" for name in METRIC_NAMES)
    return f"{dataset},{method},{seed},{pi:.10g},{vals}"
