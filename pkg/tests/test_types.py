import numpy as np
import pytest

from ldl_denoise.errors import (
    NegativeEntry,
    NonFiniteError,
    RowSumViolation,
    ShapeMismatch,
)
from ldl_denoise.types import (
    Hyperparams,
    InstanceMatrix,
    Model,
    default_hyperparams,
    validate_distribution_matrix,
    zscore,
)


class TestValidateDistributionMatrix:
    def test_accepts_single_row_example(self):
        m = validate_distribution_matrix([[0.25, 0.4, 0.3, 0.05]])
        np.testing.assert_allclose(m.values, [[0.25, 0.4, 0.3, 0.05]])

    def test_accepts_exact_simplex_rows(self):
        m = validate_distribution_matrix([[0.5, 0.5], [1.0, 0.0]])
        assert m.n == 2 and m.q == 2

    def test_rejects_row_sum_violation(self):
        with pytest.raises(RowSumViolation):
            validate_distribution_matrix([[0.6, 0.6]])

    def test_rejects_entry_below_clamp(self):
        with pytest.raises(NegativeEntry):
            validate_distribution_matrix([[1.0 + 1e-6, -1e-6]])

    def test_clamps_tiny_negatives(self):
        m = validate_distribution_matrix([[1.0, -1e-13]])
        assert m.values[0, 1] == 0.0

    def test_rejects_nan(self):
        with pytest.raises(NonFiniteError):
            validate_distribution_matrix([[np.nan, 1.0]])

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        rows = rng.dirichlet(np.ones(5), size=40)
        once = validate_distribution_matrix(rows)
        twice = validate_distribution_matrix(once)
        assert np.array_equal(once.values, twice.values)

    def test_random_dirichlet_rows_stay_on_simplex(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            q = rng.integers(2, 12)
            rows = rng.dirichlet(np.ones(q), size=int(rng.integers(1, 30)))
            m = validate_distribution_matrix(rows)
            np.testing.assert_allclose(m.values.sum(axis=1), 1.0, atol=1e-9)
            assert m.values.min() >= 0.0

    def test_values_are_read_only(self):
        m = validate_distribution_matrix([[0.5, 0.5]])
        with pytest.raises(ValueError):
            m.values[0, 0] = 0.3


class TestInstanceMatrix:
    def test_needs_two_rows(self):
        with pytest.raises(ShapeMismatch):
            InstanceMatrix(np.zeros((1, 3)))

    def test_rejects_inf(self):
        with pytest.raises(NonFiniteError):
            InstanceMatrix([[1.0, np.inf], [0.0, 0.0]])

    def test_shape_properties(self):
        m = InstanceMatrix(np.arange(12.0).reshape(4, 3))
        assert (m.n, m.d) == (4, 3)


class TestModel:
    def test_dimension_checks(self):
        from ldl_denoise.errors import DimensionMismatch

        with pytest.raises(DimensionMismatch):
            Model(W=np.zeros((3, 2)), P=np.zeros((3, 3)), Q=np.zeros((2, 2)))
        with pytest.raises(DimensionMismatch):
            Model(W=np.zeros((3, 2)), P=np.zeros((3, 2)), Q=np.zeros((3, 3)))


class TestHyperparams:
    def test_defaults_match_contract(self):
        h = default_hyperparams(24, 18)
        assert h.alpha == h.beta == h.gamma == 0.05
        assert h.sigma == 0.5
        assert h.k_neighbors == 10
        assert h.mu_growth == 1.1
        assert (h.mu0, h.mu_max) == (0.1, 1e6)
        assert (h.tol, h.max_iter, h.l21_smooth_eps) == (1e-6, 200, 1e-8)

    def test_defaults_valid_for_tiny_dims(self):
        h = default_hyperparams(1, 2)
        assert h.mu0 < h.mu_max

    def test_rejects_bad_schedule(self):
        with pytest.raises(ValueError):
            Hyperparams(mu0=2.0, mu_max=1.0)
        with pytest.raises(ValueError):
            Hyperparams(mu_growth=1.0)
        with pytest.raises(ValueError):
            Hyperparams(sigma=0.0)


def test_zscore_centers_and_scales():
    rng = np.random.default_rng(3)
    X = rng.normal(5.0, 3.0, size=(200, 4))
    X[:, 2] = 7.0  # constant column maps to exactly zero
    Z = zscore(X)
    np.testing.assert_allclose(Z.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(Z.std(axis=0)[[0, 1, 3]], 1.0, atol=1e-12)
    assert np.all(Z[:, 2] == 0.0)
