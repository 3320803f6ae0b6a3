import numpy as np

from ldl_denoise.datasets import DatasetManifest, write_manifest, write_matrix_csv
from ldl_denoise.prox import project_rows_to_simplex


def make_toy_dataset(dir_path, name="toy", n=40, d=5, q=3, seed=0, spread=0.08):
    """Write a small dataset whose labels are linear in a shared latent, so
    the solver pipeline behaves sensibly at toy scale."""
    dir_path.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    L = rng.normal(size=(n, q))
    B = rng.normal(size=(q, q))
    B -= B.mean(axis=1, keepdims=True)
    raw = L @ B
    raw *= spread / raw.std()
    D = project_rows_to_simplex(raw + 1.0 / q)
    A = np.linalg.qr(rng.normal(size=(d - 1, q)))[0].T
    X = np.concatenate([raw @ A, np.ones((n, 1))], axis=1)
    X = X + 0.005 * rng.normal(size=(n, d))
    write_matrix_csv(dir_path / "features.csv", X)
    write_matrix_csv(dir_path / "labels.csv", D)
    manifest = DatasetManifest(
        name=name,
        features_path="features.csv",
        labels_path="labels.csv",
        n=n,
        d=d,
        q=q,
    )
    write_manifest(manifest, dir_path / "manifest.txt")
    return dir_path / "manifest.txt", X, D
