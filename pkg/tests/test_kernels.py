import numpy as np
import pytest

from genkpca.errors import InputError
from genkpca.kernels import (
    CenteringStats,
    KernelSpec,
    center,
    center_vector,
    eval_kernel,
    gram,
    kernel_matrix,
)

from .oracles import brute_centered_kernel_vector


class TestEvalKernel:
    def test_gaussian_identity(self):
        spec = KernelSpec("gaussian", 2.0)
        assert eval_kernel(spec, [0.0, 0.0], [0.0, 0.0]) == 1.0

    def test_gaussian_scalar_value(self):
        spec = KernelSpec("gaussian", 2.0)
        assert eval_kernel(spec, [0.0, 0.0], [0.0, 2.0]) == pytest.approx(np.exp(-1.0), abs=1e-12)

    def test_laplace_scalar_value(self):
        spec = KernelSpec("laplace", 1.0)
        assert eval_kernel(spec, [0.0], [3.0]) == pytest.approx(np.exp(-3.0), abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            eval_kernel(KernelSpec(), [0.0, 0.0], [0.0])

    def test_bounded_unit_interval(self):
        rng = np.random.default_rng(7)
        for spec in (KernelSpec("gaussian", 0.5), KernelSpec("laplace", 3.0)):
            for _ in range(50):
                x, y = rng.normal(size=(2, 4))
                v = eval_kernel(spec, x, y)
                assert 0.0 < v <= 1.0

    def test_invalid_spec(self):
        with pytest.raises(InputError):
            KernelSpec("cubic", 1.0)
        with pytest.raises(InputError):
            KernelSpec("gaussian", 0.0)
        with pytest.raises(InputError):
            KernelSpec("gaussian", -2.0)

    def test_quadratic_matches_formula(self):
        spec = KernelSpec("quadratic", 1.0)
        assert eval_kernel(spec, [1.0, 2.0], [3.0, -1.0]) == pytest.approx((1 + 1) ** 2)


class TestGram:
    def test_identical_rows(self):
        K = gram(KernelSpec("gaussian", 2.0), [[1.0, 1.0], [1.0, 1.0]])
        assert np.array_equal(K.values, np.ones((2, 2)))

    def test_two_point_values(self):
        K = gram(KernelSpec("gaussian", 2.0), [[0.0, 0.0], [0.0, 2.0]])
        expected = np.array([[1.0, np.exp(-1.0)], [np.exp(-1.0), 1.0]])
        np.testing.assert_allclose(K.values, expected, atol=1e-12)

    def test_exact_symmetry_and_unit_diagonal(self):
        rng = np.random.default_rng(11)
        for seed in range(5):
            X = np.random.default_rng(seed).normal(size=(rng.integers(2, 20), 4))
            for family, bw in (("gaussian", 1.3), ("laplace", 0.7)):
                K = gram(KernelSpec(family, bw), X)
                assert np.array_equal(K.values, K.values.T)
                assert np.array_equal(np.diag(K.values), np.ones(len(X)))
                assert K.values.min() > 0.0
                assert K.values.max() <= 1.0

    def test_too_few_rows(self):
        with pytest.raises(InputError):
            gram(KernelSpec(), [[1.0, 2.0]])


class TestCenter:
    def test_hand_computed_two_by_two(self):
        K = gram(KernelSpec("gaussian", 2.0), [[0.0], [2.0 * np.sqrt(np.log(2.0))]])
        np.testing.assert_allclose(K.values, [[1.0, 0.5], [0.5, 1.0]], atol=1e-12)
        centered, stats = center(K)
        np.testing.assert_allclose(
            centered.values, [[0.25, -0.25], [-0.25, 0.25]], atol=1e-12
        )
        assert centered.centered
        assert stats.grand_mean == pytest.approx(0.75, abs=1e-12)

    def test_constant_matrix_centers_to_zero(self):
        K = gram(KernelSpec("gaussian", 2.0), np.ones((4, 2)))
        centered, _ = center(K)
        np.testing.assert_allclose(centered.values, 0.0, atol=1e-15)

    def test_row_and_column_sums_vanish(self):
        for seed in range(5):
            X = np.random.default_rng(seed).normal(size=(12, 3))
            centered, _ = center(gram(KernelSpec("gaussian", 1.0), X))
            n = centered.n
            assert np.abs(centered.values.sum(axis=0)).max() <= 1e-8 * n
            assert np.abs(centered.values.sum(axis=1)).max() <= 1e-8 * n
            assert np.array_equal(centered.values, centered.values.T)

    def test_idempotent(self):
        X = np.random.default_rng(5).normal(size=(9, 2))
        centered, _ = center(gram(KernelSpec("gaussian", 1.0), X))
        from genkpca.kernels import GramMatrix

        twice, _ = center(GramMatrix(values=centered.values, centered=False))
        assert np.abs(twice.values - centered.values).max() <= 1e-10

    def test_grand_mean_consistency(self):
        X = np.random.default_rng(6).normal(size=(7, 2))
        _, stats = center(gram(KernelSpec("gaussian", 1.0), X))
        assert stats.grand_mean == pytest.approx(stats.row_means.mean(), abs=1e-12)


class TestCenterVector:
    def test_training_point_reproduces_gram_row(self):
        X = np.random.default_rng(2).normal(size=(10, 3))
        spec = KernelSpec("gaussian", 2.0)
        K = gram(spec, X)
        centered, stats = center(K)
        for j in range(len(X)):
            vec, self_c = center_vector(stats, K.values[j], 1.0)
            assert np.abs(vec - centered.values[j]).max() <= 1e-10
            assert self_c == pytest.approx(centered.values[j, j], abs=1e-10)

    def test_constant_training_set(self):
        X = np.ones((5, 2))
        spec = KernelSpec("gaussian", 2.0)
        _, stats = center(gram(spec, X))
        vec, self_c = center_vector(stats, np.ones(5), 1.0)
        np.testing.assert_allclose(vec, 0.0, atol=1e-15)
        assert self_c == pytest.approx(0.0, abs=1e-15)

    def test_against_explicit_feature_space(self):
        # Three points, quadratic kernel: centered kernel values must agree
        # with inner products of explicitly centered feature embeddings.
        X = np.array([[1.0, 0.5], [-0.3, 2.0], [0.7, -1.2]])
        z = np.array([0.4, 0.9])
        spec = KernelSpec("quadratic", 1.0)
        K = gram(spec, X)
        _, stats = center(K)
        k_vec = kernel_matrix(spec, z[None, :], X)[0]
        self_k = float(kernel_matrix(spec, z[None, :], z[None, :])[0, 0])
        vec, self_c = center_vector(stats, k_vec, self_k)

        expected_vec, expected_self = brute_centered_kernel_vector(X, z, 1.0)
        np.testing.assert_allclose(vec, expected_vec, atol=1e-10)
        assert self_c == pytest.approx(expected_self, abs=1e-10)

    def test_length_mismatch(self):
        stats = CenteringStats(row_means=np.zeros(4), grand_mean=0.0)
        with pytest.raises(InputError):
            center_vector(stats, np.zeros(3), 1.0)
