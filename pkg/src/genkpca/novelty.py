"""Novelty scoring via reconstruction error in feature space.

The score of a point z is the squared distance between its centered
feature-space embedding and the projection of that embedding onto the
span of the leading principal axes:

    score(z) = ||phi_c(z)||^2 - sum_l f_l(z)^2
    f_l(z)   = (1 / sqrt(lambda_l)) * sum_i H[l, i] * k_c(z, x_i)

The 1/sqrt(lambda) normalization makes each feature-space axis unit
norm, so adding components can only shrink the score.  Components below
the rank tolerance are excluded from the sum.  Scores are clamped at 0;
residual negativity is eigensolver roundoff only.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from ._validation import check_matrix
from .errors import InputError

if TYPE_CHECKING:
    from .model import GenerativeKernelPCA


@dataclass(frozen=True)
class NoveltyReport:
    """Scores, the quantile threshold, and per-point novel/normal flags."""

    scores: np.ndarray
    threshold: float
    flags: np.ndarray
    quantile: float

    @property
    def flagged_count(self) -> int:
        return int(self.flags.sum())

    def write_csv(self, path) -> None:
        """Write ``index,score,flag`` rows (flag as 0/1)."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "score", "flag"])
            for i, (s, f) in enumerate(zip(self.scores, self.flags)):
                writer.writerow([i, repr(float(s)), int(f)])


def novelty_scores(model: "GenerativeKernelPCA", Z, clip: bool = True) -> np.ndarray:
    """Reconstruction-error novelty score for each row of ``Z``.

    ``clip=False`` skips the clamp at zero (used to verify that
    pre-clamp negativity stays within eigensolver noise).
    """
    model._check_fitted()
    Z = check_matrix(Z, name="Z")
    if Z.shape[1] != model.n_features_in_:
        raise InputError(
            f"Z has {Z.shape[1]} features, model was fit with {model.n_features_in_}"
        )
    centered, centered_self = model._centered_cross_kernel(Z)
    active = model.active_components_
    f = centered @ model.hidden_units_[active].T
    f /= np.sqrt(model.eigenvalues_[active])
    scores = centered_self - np.sum(f * f, axis=1)
    return np.maximum(scores, 0.0) if clip else scores


def novelty_score(model: "GenerativeKernelPCA", z) -> float:
    """Novelty score of a single point."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1:
        raise InputError(f"z must be 1-D, got shape {z.shape}")
    return float(novelty_scores(model, z[None, :])[0])


def training_novelty_scores(model: "GenerativeKernelPCA") -> np.ndarray:
    """Scores of the training set from the stored centered Gram matrix.

    For training point j the projection onto axis l is exactly
    sqrt(lambda_l) * H[l, j], so no kernel evaluations are needed:
    score_j = K_c[j, j] - sum_l lambda_l * H[l, j]^2.
    """
    model._check_fitted()
    active = model.active_components_
    h_sq = model.hidden_units_[active] ** 2
    projected = model.eigenvalues_[active] @ h_sq
    scores = np.diag(model.gram_.values) - projected
    return np.maximum(scores, 0.0)


def novelty_report(
    model: "GenerativeKernelPCA", Z=None, quantile: float = 0.2
) -> NoveltyReport:
    """Score points and flag the top ``quantile`` fraction as novel.

    ``Z=None`` scores the training set via the stored Gram matrix.  The
    threshold is the ceil(quantile * M)-th largest score; exactly that
    many points are flagged, with ties at the threshold resolved toward
    lower indices.
    """
    if not 0.0 < quantile < 1.0:
        raise InputError(f"quantile must lie in (0, 1), got {quantile}")
    if Z is None or Z is getattr(model, "X_fit_", None):
        scores = training_novelty_scores(model)
    else:
        scores = novelty_scores(model, Z)
    m = scores.shape[0]
    if m == 0:
        raise InputError("cannot build a novelty report for 0 points")
    # The tiny offset guards against ceil(0.2 * 1000) -> 201 style float slop.
    n_flag = min(m, max(1, math.ceil(quantile * m - 1e-9)))
    order = np.argsort(-scores, kind="stable")
    threshold = float(scores[order[n_flag - 1]])
    flags = np.zeros(m, dtype=bool)
    flags[order[:n_flag]] = True
    return NoveltyReport(scores=scores, threshold=threshold, flags=flags, quantile=quantile)
