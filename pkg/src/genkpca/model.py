"""Kernel PCA latent-space model with a scikit-learn style estimator API.

``fit`` solves the eigenproblem of the centered training Gram matrix,
``K_c H^T = H^T Lambda``, keeping the leading ``n_components``
eigenpairs.  Column i of ``hidden_units_`` is the latent representation
of training point i.  ``transform`` projects out-of-sample points onto
the same latent coordinates; this is an extension beyond training-set
exploration (normalized so training points land exactly on their stored
hidden units) and is documented as such.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg
from sklearn.base import BaseEstimator, TransformerMixin

from . import kernels
from ._validation import check_index, check_matrix, check_vector
from .errors import InputError, NumericError

#: Components with eigenvalue <= RANK_RTOL * lambda_1 are retained in the
#: model but flagged inactive: projections emit 0 for them and novelty
#: scoring excludes them, avoiding 1/lambda blow-ups.
RANK_RTOL = 1e-10

#: Eigenvalues in [-CLAMP_RTOL * lambda_1, 0) are clamped to zero; anything
#: more negative means the input was not a centered PSD Gram matrix.
CLAMP_RTOL = 1e-8
# Absolute slack covers the all-identical-points case where lambda_1 == 0.
_CLAMP_ATOL = 1e-12


class GenerativeKernelPCA(BaseEstimator, TransformerMixin):
    """Kernel PCA fitted for latent exploration, generation, and novelty.

    Parameters
    ----------
    n_components : int or None
        Number of latent components ``d`` to keep, ``1 <= d <= N``.
        ``None`` keeps all ``N``.
    kernel : str
        Kernel family: ``"gaussian"`` (default), ``"laplace"``, or
        ``"quadratic"``.
    bandwidth_sq : float
        sigma**2 for the Gaussian kernel; sigma for the Laplace kernel;
        additive constant for the quadratic kernel.
    n_neighbors : int
        Default neighborhood size ``S`` used by ``inverse_transform``
        when none is given per call.

    Attributes
    ----------
    X_fit_ : ndarray of shape (N, d_in)
        Training data.
    hidden_units_ : ndarray of shape (d, N)
        Row l is the l-th unit-norm eigenvector of the centered Gram
        matrix; column i is the hidden unit of training point i.
    eigenvalues_ : ndarray of shape (d,)
        Nonincreasing, nonnegative eigenvalues.
    gram_ : kernels.GramMatrix
        Centered training Gram matrix.
    centering_ : kernels.CenteringStats
        Statistics reused to center out-of-sample kernel vectors.
    active_components_ : ndarray of bool, shape (d,)
        Mask of components whose eigenvalue exceeds the rank tolerance.
    """

    def __init__(self, n_components=None, kernel="gaussian", bandwidth_sq=1.0, n_neighbors=10):
        self.n_components = n_components
        self.kernel = kernel
        self.bandwidth_sq = bandwidth_sq
        self.n_neighbors = n_neighbors

    # ------------------------------------------------------------------
    # fitting

    def fit(self, X, y=None):
        """Solve the centered Gram eigenproblem for the training set."""
        X = check_matrix(X, min_rows=2)
        n = X.shape[0]
        d = n if self.n_components is None else int(self.n_components)
        if not 1 <= d <= n:
            raise InputError(f"n_components must satisfy 1 <= d <= {n}, got {d}")
        spec = kernels.KernelSpec(family=self.kernel, bandwidth_sq=self.bandwidth_sq)

        gram_raw = kernels.gram(spec, X)
        gram_centered, stats = kernels.center(gram_raw)
        try:
            eigvals, eigvecs = scipy.linalg.eigh(gram_centered.values)
        except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as exc:
            raise NumericError(f"eigendecomposition failed: {exc}") from exc

        order = np.argsort(-eigvals, kind="stable")
        eigvals = eigvals[order][:d]
        eigvecs = eigvecs[:, order][:, :d]

        lam_max = float(eigvals[0])
        tol = CLAMP_RTOL * max(lam_max, 0.0) + _CLAMP_ATOL
        if np.any(eigvals < -tol):
            raise NumericError(
                f"centered Gram matrix has eigenvalue {eigvals.min():.3e} below -{tol:.3e}; "
                "not positive semi-definite"
            )
        eigvals = np.maximum(eigvals, 0.0)

        # Canonical sign: largest-magnitude entry of each eigenvector positive.
        for col in range(d):
            v = eigvecs[:, col]
            if v[np.argmax(np.abs(v))] < 0:
                eigvecs[:, col] = -v

        self.X_fit_ = X.copy()
        self.kernel_spec_ = spec
        self.gram_ = gram_centered
        self.centering_ = stats
        self.hidden_units_ = np.ascontiguousarray(eigvecs.T)
        self.eigenvalues_ = eigvals
        self.active_components_ = eigvals > RANK_RTOL * float(eigvals[0])
        self.n_samples_ = n
        self.n_features_in_ = X.shape[1]
        self.n_components_ = d
        return self

    def _check_fitted(self):
        if not hasattr(self, "hidden_units_"):
            raise InputError("model is not fitted")

    # ------------------------------------------------------------------
    # latent access

    def hidden_unit(self, i: int) -> np.ndarray:
        """Latent coordinates of training point ``i`` (column i of H)."""
        self._check_fitted()
        i = check_index(i, self.n_samples_, name="training index")
        return self.hidden_units_[:, i].copy()

    def _centered_cross_kernel(self, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Centered kernel vectors k_c(z, x_i) and ||phi_c(z)||^2 per row of Z."""
        K_zx = kernels.kernel_matrix(self.kernel_spec_, Z, self.X_fit_)
        self_k = kernels.self_kernel(self.kernel_spec_, Z)
        m = K_zx.mean(axis=1)
        stats = self.centering_
        centered = K_zx - m[:, None] - stats.row_means[None, :] + stats.grand_mean
        centered_self = self_k - 2.0 * m + stats.grand_mean
        return centered, centered_self

    def transform(self, Z) -> np.ndarray:
        """Project rows of ``Z`` into the latent space.

        Coordinates are scaled by 1/lambda_l so that training points map
        onto their stored hidden units; inactive components yield 0.
        """
        self._check_fitted()
        Z = check_matrix(Z, name="Z")
        if Z.shape[1] != self.n_features_in_:
            raise InputError(
                f"Z has {Z.shape[1]} features, model was fit with {self.n_features_in_}"
            )
        centered, _ = self._centered_cross_kernel(Z)
        coords = centered @ self.hidden_units_.T
        active = self.active_components_
        coords[:, active] /= self.eigenvalues_[active]
        coords[:, ~active] = 0.0
        return coords

    def project(self, z) -> np.ndarray:
        """Latent coordinates of a single input-space point."""
        z = check_vector(z, name="z")
        return self.transform(z[None, :])[0]

    # ------------------------------------------------------------------
    # generation / novelty (thin wrappers over the dedicated modules)

    def inverse_transform(self, H, n_neighbors=None) -> np.ndarray:
        """Kernel-smoother pre-images of latent points (rows of ``H``)."""
        from .generator import preimage

        self._check_fitted()
        H = check_matrix(H, name="H")
        S = self.n_neighbors if n_neighbors is None else n_neighbors
        return np.stack([preimage(self, h, S).x_hat for h in H])

    def novelty_scores(self, Z) -> np.ndarray:
        """Feature-space reconstruction error of each row of ``Z``."""
        from .novelty import novelty_scores

        return novelty_scores(self, Z)

    # ------------------------------------------------------------------

    @property
    def lambda_max_(self) -> float:
        self._check_fitted()
        return float(self.eigenvalues_[0])
