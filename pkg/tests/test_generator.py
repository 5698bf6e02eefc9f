import numpy as np
import pytest

from genkpca.errors import DegenerateSimilarityError, InputError
from genkpca.generator import TraversalPath, generate_sequence, preimage, similarity, traverse
from genkpca.model import GenerativeKernelPCA

from .conftest import make_model
from .oracles import brute_preimage


class TestSimilarity:
    def test_full_rank_reconstruction_identity(self, full_rank_model):
        # With d = N the reconstructed similarity at a stored hidden unit
        # is exactly that point's column of the centered Gram matrix.
        est = full_rank_model
        K = est.gram_.values
        for j in range(est.n_samples_):
            sim = similarity(est, est.hidden_unit(j))
            assert np.abs(sim.raw - K[:, j]).max() <= 1e-8

    def test_zero_latent_point_degenerate(self, full_rank_model):
        sim = similarity(full_rank_model, np.zeros(full_rank_model.n_components_))
        assert np.array_equal(sim.raw, np.zeros(full_rank_model.n_samples_))
        assert np.array_equal(sim.scaled, np.zeros(full_rank_model.n_samples_))

    def test_three_point_hand_computed(self):
        est = make_model(n=3, d_in=2, d=1, seed=4)
        h_star = est.hidden_unit(0)
        sim = similarity(est, h_star)
        K = est.gram_.values
        H = est.hidden_units_
        expected = [
            sum(K[k, i] * H[0, i] * h_star[0] for i in range(3)) for k in range(3)
        ]
        np.testing.assert_allclose(sim.raw, expected, atol=1e-12)

    def test_scaled_range(self, full_rank_model):
        sim = similarity(full_rank_model, full_rank_model.hidden_unit(2))
        assert sim.scaled.min() == 0.0
        assert sim.scaled.max() == 1.0
        assert np.all((sim.scaled >= 0.0) & (sim.scaled <= 1.0))

    def test_power_of_two_scaling_exact(self, full_rank_model):
        h = full_rank_model.hidden_unit(1)
        base = similarity(full_rank_model, h)
        for alpha in (2.0, 0.5, 8.0):
            scaled = similarity(full_rank_model, alpha * h)
            assert np.array_equal(scaled.raw, alpha * base.raw)

    def test_positive_scaling_preserves_selection(self, full_rank_model):
        h = full_rank_model.hidden_unit(1)
        base = preimage(full_rank_model, h, 3)
        for alpha in (0.37, 1.9, 123.4):
            other = preimage(full_rank_model, alpha * h, 3)
            assert [i for i, _ in other.neighbors] == [i for i, _ in base.neighbors]

    def test_length_mismatch(self, full_rank_model):
        with pytest.raises(InputError):
            similarity(full_rank_model, np.zeros(full_rank_model.n_components_ + 1))


class TestPreimage:
    def test_single_neighbor_returns_training_point(self, full_rank_model):
        est = full_rank_model
        for j in range(est.n_samples_):
            sample = preimage(est, est.hidden_unit(j), 1)
            assert np.array_equal(sample.x_hat, est.X_fit_[j])
            assert sample.neighbors == [(j, 1.0)]

    def test_three_point_hand_weighted_mean(self):
        est = make_model(n=3, d_in=2, d=2, seed=10)
        h_star = 0.5 * est.hidden_unit(0) + 0.5 * est.hidden_unit(1)
        sample = preimage(est, h_star, 2)
        sim = similarity(est, h_star)
        order = np.argsort(-sim.scaled, kind="stable")[:2]
        w = sim.scaled[order]
        expected = (w[0] * est.X_fit_[order[0]] + w[1] * est.X_fit_[order[1]]) / (w[0] + w[1])
        np.testing.assert_allclose(sample.x_hat, expected, atol=1e-12)

    def test_matches_brute_force_exactly(self):
        for seed in range(6):
            n = 3 + seed
            est = make_model(n=n, d_in=3, d=None, seed=seed)
            rng = np.random.default_rng(100 + seed)
            h_star = rng.normal(size=est.n_components_) * 0.2
            for S in (1, 2, n):
                sample = preimage(est, h_star, S)
                expected = brute_preimage(est.X_fit_, similarity(est, h_star).scaled, S)
                assert np.array_equal(sample.x_hat, expected)

    def test_convex_combination(self, full_rank_model):
        est = full_rank_model
        rng = np.random.default_rng(3)
        for _ in range(10):
            h = rng.normal(size=est.n_components_) * 0.3
            sample = preimage(est, h, 4)
            rows = est.X_fit_[[i for i, _ in sample.neighbors]]
            assert np.all(sample.x_hat >= rows.min(axis=0) - 1e-12)
            assert np.all(sample.x_hat <= rows.max(axis=0) + 1e-12)

    def test_neighbors_sorted_descending(self, full_rank_model):
        sample = preimage(full_rank_model, full_rank_model.hidden_unit(0), 5)
        sims = [s for _, s in sample.neighbors]
        assert sims == sorted(sims, reverse=True)
        assert len(sample.neighbors) == 5

    def test_tie_prefers_lower_index(self):
        # Duplicate training points produce exactly tied similarities.
        X = np.array([[0.0, 0.0], [1.0, 1.0], [1.0, 1.0], [3.0, 0.5]])
        est = GenerativeKernelPCA(n_components=4, bandwidth_sq=2.0).fit(X)
        h = est.hidden_unit(1)
        sample = preimage(est, h, 1)
        assert sample.neighbors[0][0] == 1

    def test_s_out_of_range(self, full_rank_model):
        h = full_rank_model.hidden_unit(0)
        with pytest.raises(InputError):
            preimage(full_rank_model, h, 0)
        with pytest.raises(InputError):
            preimage(full_rank_model, h, full_rank_model.n_samples_ + 1)

    def test_degenerate_similarity(self, full_rank_model):
        with pytest.raises(DegenerateSimilarityError):
            preimage(full_rank_model, np.zeros(full_rank_model.n_components_), 3)


class TestTraversal:
    def test_constant_sweep_identical_samples(self, full_rank_model):
        est = full_rank_model
        path = TraversalPath.along_component(est.hidden_unit(0), 1, 0.05, 0.05, 4)
        samples = traverse(est, path, 3)
        assert len(samples) == 4
        for s in samples[1:]:
            assert np.array_equal(s.x_hat, samples[0].x_hat)

    def test_interpolation_endpoints_bit_exact(self, full_rank_model):
        est = full_rank_model
        path = TraversalPath.between(est.hidden_unit(1), est.hidden_unit(4), 5)
        samples = traverse(est, path, 1)
        assert np.array_equal(samples[0].x_hat, est.X_fit_[1])
        assert np.array_equal(samples[-1].x_hat, est.X_fit_[4])

    def test_equally_spaced_latent_points(self, full_rank_model):
        est = full_rank_model
        path = TraversalPath.along_component(est.hidden_unit(0), 0, -0.4, 0.4, 9)
        points = path.latent_points()
        assert len(points) == 9
        diffs = np.diff(np.stack(points), axis=0)
        assert np.abs(diffs - diffs[0]).max() <= 1e-12

        path = TraversalPath.between(est.hidden_unit(0), est.hidden_unit(3), 6)
        diffs = np.diff(np.stack(path.latent_points()), axis=0)
        assert np.abs(diffs - diffs[0]).max() <= 1e-12

    def test_step_count_matches(self, full_rank_model):
        path = TraversalPath.between(full_rank_model.hidden_unit(0), full_rank_model.hidden_unit(2), 7)
        assert len(traverse(full_rank_model, path, 2)) == 7

    def test_invalid_paths(self, full_rank_model):
        h = full_rank_model.hidden_unit(0)
        with pytest.raises(InputError):
            TraversalPath.along_component(h, 0, 0.0, 1.0, 1)
        with pytest.raises(InputError):
            TraversalPath.along_component(h, full_rank_model.n_components_, 0.0, 1.0, 3)
        with pytest.raises(InputError):
            TraversalPath.between(h, np.zeros(len(h) + 1), 3)

    def test_degenerate_step_reports_index(self, full_rank_model):
        est = full_rank_model
        points = [est.hidden_unit(0), np.zeros(est.n_components_)]
        with pytest.raises(DegenerateSimilarityError, match="step 1"):
            generate_sequence(est, points, 2)
