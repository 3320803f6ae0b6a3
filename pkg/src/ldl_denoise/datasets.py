"""Dataset ingestion: headerless CSV pairs plus a key-value manifest.

A dataset is two CSV files (features n x d, labels n x q, no headers) and
a manifest like::

    name = toy
    features_path = features.csv
    labels_path = labels.csv
    n = 20
    d = 3
    q = 4
    checksum = 0x1a2b3c4d5e6f7081   # optional; recorded on first load

Relative paths are resolved against the manifest's directory. The checksum
covers the raw bytes of both CSVs; once recorded it is enforced on every
subsequent load.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from hashlib import blake2b
from pathlib import Path

import numpy as np

from .errors import ChecksumMismatch, ParseError, ShapeMismatch
from .kv import read_kv, write_kv
from .types import InstanceMatrix, validate_distribution_matrix, zscore


@dataclass(frozen=True)
class DatasetManifest:
    name: str
    features_path: str
    labels_path: str
    n: int
    d: int
    q: int
    checksum: str | None = None  # 16 hex chars, 64 bits


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    seed: int

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")


@dataclass(frozen=True)
class SplitResult:
    train: tuple  # (X_train, D_train)
    test: tuple  # (X_test, D_test)
    train_indices: np.ndarray
    test_indices: np.ndarray


def read_manifest(path):
    path = Path(path)
    pairs = read_kv(path)
    try:
        checksum = pairs.get("checksum")
        if checksum is not None:
            checksum = checksum.lower().removeprefix("0x")
        return DatasetManifest(
            name=pairs["name"],
            features_path=str((path.parent / pairs["features_path"]).resolve()),
            labels_path=str((path.parent / pairs["labels_path"]).resolve()),
            n=int(pairs["n"]),
            d=int(pairs["d"]),
            q=int(pairs["q"]),
            checksum=checksum,
        )
    except KeyError as exc:
        raise ParseError(f"{path}: missing manifest key {exc}") from exc
    except ValueError as exc:
        raise ParseError(f"{path}: bad manifest value: {exc}") from exc


def write_manifest(manifest, path):
    pairs = {
        "name": manifest.name,
        "features_path": manifest.features_path,
        "labels_path": manifest.labels_path,
        "n": str(manifest.n),
        "d": str(manifest.d),
        "q": str(manifest.q),
    }
    if manifest.checksum is not None:
        pairs["checksum"] = "0x" + manifest.checksum
    write_kv(path, pairs)


def files_checksum(*paths):
    """64-bit hex digest over the concatenated raw bytes of the files."""
    h = blake2b(digest_size=8)
    for p in paths:
        h.update(Path(p).read_bytes())
    return h.hexdigest()


def read_matrix_csv(path):
    try:
        arr = np.loadtxt(path, delimiter=",", dtype=float, ndmin=2)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise ParseError(f"{path}: malformed CSV: {exc}") from exc
    return arr


def write_matrix_csv(path, M):
    M = M.values if hasattr(M, "values") else np.asarray(M, dtype=float)
    with open(path, "w", encoding="ascii") as fh:
        for row in M:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def load_dataset(manifest, normalize=True, enforce_checksum=True):
    """Load (features, labels) for a manifest.

    Features are z-scored per column when ``normalize`` is set (the
    benchmark path instead normalizes with training-split statistics after
    splitting, to avoid leakage). Labels are validated against the simplex.

    Returns ``(InstanceMatrix, LabelDistributionMatrix, manifest)`` where
    the manifest has its checksum filled in if it was missing.
    """
    X = read_matrix_csv(manifest.features_path)
    D = read_matrix_csv(manifest.labels_path)
    if X.shape != (manifest.n, manifest.d):
        raise ShapeMismatch(
            f"{manifest.features_path}: shape {X.shape} != declared ({manifest.n}, {manifest.d})"
        )
    if D.shape != (manifest.n, manifest.q):
        raise ShapeMismatch(
            f"{manifest.labels_path}: shape {D.shape} != declared ({manifest.n}, {manifest.q})"
        )
    digest = files_checksum(manifest.features_path, manifest.labels_path)
    if manifest.checksum is None:
        manifest = replace(manifest, checksum=digest)
    elif enforce_checksum and digest != manifest.checksum:
        raise ChecksumMismatch(
            f"{manifest.name}: checksum {digest} != recorded {manifest.checksum}"
        )
    if normalize:
        X = zscore(X)
    return InstanceMatrix(X), validate_distribution_matrix(D), manifest


def split(X, D, spec):
    """Seeded uniform shuffle, then cut at ``floor(n * train_fraction)``.

    The two index sets are disjoint and exhaustive.
    """
    Xv = X.values if hasattr(X, "values") else np.asarray(X, dtype=float)
    Dv = D.values if hasattr(D, "values") else np.asarray(D, dtype=float)
    if Xv.shape[0] != Dv.shape[0]:
        raise ShapeMismatch(f"X has {Xv.shape[0]} rows, D has {Dv.shape[0]}")
    n = Xv.shape[0]
    perm = np.random.default_rng(spec.seed).permutation(n)
    cut = int(np.floor(n * spec.train_fraction))
    train_idx, test_idx = perm[:cut], perm[cut:]
    return SplitResult(
        train=(Xv[train_idx], Dv[train_idx]),
        test=(Xv[test_idx], Dv[test_idx]),
        train_indices=train_idx,
        test_indices=test_idx,
    )
