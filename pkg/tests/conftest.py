import numpy as np
import pytest

from genkpca.model import GenerativeKernelPCA

# Two points at squared distance 4*ln(2): with sigma^2 = 2 the Gaussian
# kernel value is exactly exp(-ln 2) = 1/2, so the centered Gram is
# [[0.25, -0.25], [-0.25, 0.25]] with eigenvalue 0.5.
TWO_POINT_X = np.array([[0.0, 0.0], [0.0, 2.0 * np.sqrt(np.log(2.0))]])


def make_model(n=10, d_in=3, d=None, seed=0, kernel="gaussian", bandwidth_sq=2.0, n_neighbors=3):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d_in))
    est = GenerativeKernelPCA(
        n_components=d, kernel=kernel, bandwidth_sq=bandwidth_sq, n_neighbors=n_neighbors
    )
    return est.fit(X)


@pytest.fixture
def two_point_model():
    return GenerativeKernelPCA(n_components=1, bandwidth_sq=2.0).fit(TWO_POINT_X)


@pytest.fixture
def full_rank_model():
    """d = N model on a small random cloud."""
    return make_model(n=8, d_in=3, d=None, seed=3)
