"""Kernel evaluation, Gram matrices, and feature-space centering.

The Gram matrix of the training set is the object everything else is
built on: its centered form is eigendecomposed to obtain the latent
space, and the same centering statistics are reused to embed query
points consistently at projection, generation, and scoring time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ._validation import check_matrix, check_vector
from .errors import InputError

GAUSSIAN = "gaussian"
LAPLACE = "laplace"
QUADRATIC = "quadratic"

KERNEL_FAMILIES = (GAUSSIAN, LAPLACE, QUADRATIC)

#: Families whose kernels are bounded in (0, 1] with k(x, x) == 1.
UNIT_DIAGONAL_FAMILIES = (GAUSSIAN, LAPLACE)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus its bandwidth parameter.

    ``bandwidth_sq`` is sigma**2 for the Gaussian RBF kernel
    ``exp(-||x - y||^2 / (2 sigma^2))``.  For the Laplace kernel
    ``exp(-||x - y|| / sigma)`` the same field stores sigma and is
    interpreted accordingly.  The quadratic kernel ``(c + x.y)^2``
    stores the additive constant c; it exists so that fitted models can
    be validated against an explicit finite-dimensional feature map.
    """

    family: str = GAUSSIAN
    bandwidth_sq: float = 1.0

    def __post_init__(self):
        if self.family not in KERNEL_FAMILIES:
            raise InputError(
                f"unknown kernel family {self.family!r}; expected one of {KERNEL_FAMILIES}"
            )
        if not (np.isfinite(self.bandwidth_sq) and self.bandwidth_sq > 0):
            raise InputError("kernel bandwidth must be strictly positive")


@dataclass(frozen=True)
class GramMatrix:
    """N x N symmetric matrix of pairwise kernel values.

    ``centered`` records whether the values have been double centered
    (every row and column summing to zero).
    """

    values: np.ndarray
    centered: bool = False

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class CenteringStats:
    """Row means and grand mean of an uncentered Gram matrix.

    Retained by fitted models so out-of-sample kernel vectors can be
    centered consistently with the training-time double centering.
    """

    row_means: np.ndarray
    grand_mean: float

    @property
    def n(self) -> int:
        return self.row_means.shape[0]


def eval_kernel(spec: KernelSpec, x, y) -> float:
    """Evaluate k(x, y) for a single pair of points.

    For the Gaussian and Laplace families the result lies in (0, 1]
    and equals exactly 1 when ``x == y``.
    """
    x = check_vector(np.atleast_1d(x), name="x")
    y = check_vector(np.atleast_1d(y), name="y")
    if x.shape != y.shape:
        raise InputError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    return float(kernel_matrix(spec, x[None, :], y[None, :])[0, 0])


def kernel_matrix(spec: KernelSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pairwise kernel values between the rows of ``A`` and ``B``."""
    if spec.family == GAUSSIAN:
        sq = cdist(A, B, metric="sqeuclidean")
        return np.exp(-sq / (2.0 * spec.bandwidth_sq))
    if spec.family == LAPLACE:
        dist = cdist(A, B, metric="euclidean")
        return np.exp(-dist / spec.bandwidth_sq)
    # quadratic: (c + x.y)^2
    return (spec.bandwidth_sq + A @ B.T) ** 2


def self_kernel(spec: KernelSpec, A: np.ndarray) -> np.ndarray:
    """k(x, x) for each row of ``A`` (all ones for unit-diagonal families)."""
    if spec.family in UNIT_DIAGONAL_FAMILIES:
        return np.ones(A.shape[0])
    return (spec.bandwidth_sq + np.sum(A * A, axis=1)) ** 2


def gram(spec: KernelSpec, X) -> GramMatrix:
    """Uncentered Gram matrix over the rows of ``X``.

    Exact symmetry is enforced by computing the upper triangle once and
    mirroring it, which removes floating-point asymmetry before the
    eigensolve.  The diagonal is exactly 1 for unit-diagonal families.
    """
    X = check_matrix(X, min_rows=2)
    K = kernel_matrix(spec, X, X)
    diag = np.ones(X.shape[0]) if spec.family in UNIT_DIAGONAL_FAMILIES else np.diag(K).copy()
    upper = np.triu(K, k=1)
    K = upper + upper.T
    np.fill_diagonal(K, diag)
    return GramMatrix(values=K, centered=False)


def center(K: GramMatrix) -> tuple[GramMatrix, CenteringStats]:
    """Double center a Gram matrix and keep the statistics to reuse.

    Computes ``K_c = K - 1K - K1 + 1K1`` with ``1`` the N x N matrix of
    1/N entries, realized through row means and the grand mean.  The
    result has vanishing row and column sums; re-centering an already
    centered matrix is a no-op up to roundoff.
    """
    values = K.values
    row_means = values.mean(axis=1)
    grand_mean = float(row_means.mean())
    centered = values - row_means[:, None] - row_means[None, :] + grand_mean
    upper = np.triu(centered, k=1)
    diag = np.diag(centered).copy()
    centered = upper + upper.T
    np.fill_diagonal(centered, diag)
    stats = CenteringStats(row_means=row_means, grand_mean=grand_mean)
    return GramMatrix(values=centered, centered=True), stats


def center_vector(
    stats: CenteringStats, k_vec: np.ndarray, self_k: float
) -> tuple[np.ndarray, float]:
    """Center an out-of-sample kernel vector against the training set.

    ``k_vec`` holds k(z, x_i) for a query point z and ``self_k`` is
    k(z, z).  Returns the centered vector (consistent with the rows of
    the centered training Gram) and the centered self-similarity
    ``||phi_centered(z)||^2``.
    """
    k_vec = check_vector(k_vec, length=stats.n, name="k_vec")
    m = float(k_vec.mean())
    centered_vec = k_vec - m - stats.row_means + stats.grand_mean
    centered_self = float(self_k) - 2.0 * m + stats.grand_mean
    return centered_vec, centered_self
