"""Generative mechanism: similarity reconstruction, pre-images, traversals.

Given a latent point h*, the similarity of each training point x_k to
the implied input-space point x* is reconstructed from the centered
Gram matrix and the hidden units:

    raw_k = sum_i K_c[k, i] * (h_i . h*)

These raw values are min-max scaled to [0, 1] over all N training
points, and the pre-image estimate is the kernel smoother: the
scaled-similarity-weighted mean of the S most similar training points.
Scaling over all N (rather than over the selected subset) is an
interpretation choice; it leaves neighbor ranking unchanged.

Centered kernel values are used throughout so that, with a complete
eigenbasis (d = N), the reconstructed similarity at a stored hidden
unit reproduces that point's column of the centered Gram matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from ._validation import check_index, check_vector
from .errors import DegenerateSimilarityError, GkpcaError, InputError

if TYPE_CHECKING:
    from .model import GenerativeKernelPCA

ALONG_COMPONENT = "component"
INTERPOLATE = "interpolate"


@dataclass(frozen=True)
class SimilarityVector:
    """Raw and min-max scaled similarities of a latent point to the training set."""

    raw: np.ndarray
    scaled: np.ndarray


@dataclass(frozen=True)
class GeneratedSample:
    """Pre-image estimate plus the neighborhood that produced it.

    ``neighbors`` lists ``(training index, scaled similarity)`` pairs for
    the S selected points, sorted by descending similarity.
    """

    x_hat: np.ndarray
    neighbors: list[tuple[int, float]]
    h_star: np.ndarray


@dataclass(frozen=True)
class TraversalPath:
    """A straight-line walk through latent space, decoded step by step.

    Two modes: sweep one component linearly while holding the others
    fixed, or interpolate between two latent points.  Use the
    ``along_component`` / ``between`` constructors.
    """

    kind: str
    steps: int
    start: np.ndarray | None = None
    component: int | None = None
    start_value: float | None = None
    stop_value: float | None = None
    endpoint_a: np.ndarray | None = None
    endpoint_b: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in (ALONG_COMPONENT, INTERPOLATE):
            raise InputError(f"unknown traversal kind {self.kind!r}")
        if self.steps < 2:
            raise InputError(f"traversal needs at least 2 steps, got {self.steps}")

    @classmethod
    def along_component(cls, start, component: int, start_value: float, stop_value: float, steps: int):
        start = check_vector(start, name="start")
        component = check_index(component, start.shape[0], name="component")
        return cls(
            kind=ALONG_COMPONENT,
            steps=int(steps),
            start=start,
            component=component,
            start_value=float(start_value),
            stop_value=float(stop_value),
        )

    @classmethod
    def between(cls, h_a, h_b, steps: int):
        h_a = check_vector(h_a, name="h_a")
        h_b = check_vector(h_b, length=h_a.shape[0], name="h_b")
        return cls(kind=INTERPOLATE, steps=int(steps), endpoint_a=h_a, endpoint_b=h_b)

    def latent_points(self) -> list[np.ndarray]:
        """The equally spaced latent points visited by this path."""
        if self.kind == ALONG_COMPONENT:
            points = []
            for value in np.linspace(self.start_value, self.stop_value, self.steps):
                h = self.start.copy()
                h[self.component] = value
                points.append(h)
            return points
        ts = np.linspace(0.0, 1.0, self.steps)
        return [(1.0 - t) * self.endpoint_a + t * self.endpoint_b for t in ts]


def similarity(model: "GenerativeKernelPCA", h_star) -> SimilarityVector:
    """Reconstructed similarity of ``h_star`` to every training point.

    The scaled vector is all zeros when the raw similarities are
    constant (e.g. ``h_star == 0``), signalling no usable neighborhood.
    """
    model._check_fitted()
    h_star = check_vector(h_star, length=model.n_components_, name="h_star")
    projections = model.hidden_units_.T @ h_star
    raw = model.gram_.values @ projections
    lo = raw.min()
    hi = raw.max()
    if hi == lo:
        scaled = np.zeros_like(raw)
    else:
        scaled = (raw - lo) / (hi - lo)
    return SimilarityVector(raw=raw, scaled=scaled)


def preimage(model: "GenerativeKernelPCA", h_star, S: int) -> GeneratedSample:
    """Kernel-smoother pre-image of ``h_star`` from its S nearest neighbors.

    Neighbors are the S training points with the largest scaled
    similarity (ties broken toward the lower index); the estimate is
    their similarity-weighted mean.  Raises
    ``DegenerateSimilarityError`` when every selected similarity is 0.
    """
    model._check_fitted()
    S = int(S)
    if not 1 <= S <= model.n_samples_:
        raise InputError(f"S must satisfy 1 <= S <= {model.n_samples_}, got {S}")
    h_star = check_vector(h_star, length=model.n_components_, name="h_star")
    sim = similarity(model, h_star)
    order = np.argsort(-sim.scaled, kind="stable")
    selected = order[:S]
    weights = sim.scaled[selected]

    total = 0.0
    for w in weights:
        total += float(w)
    if total == 0.0:
        raise DegenerateSimilarityError(
            "all selected similarities are zero; latent point has no neighborhood"
        )

    x_hat = np.zeros(model.n_features_in_)
    for idx, w in zip(selected, weights):
        x_hat += (float(w) / total) * model.X_fit_[idx]

    neighbors = [(int(i), float(w)) for i, w in zip(selected, weights)]
    return GeneratedSample(x_hat=x_hat, neighbors=neighbors, h_star=h_star.copy())


def generate_sequence(model: "GenerativeKernelPCA", points, S: int) -> list[GeneratedSample]:
    """Pre-images for an ordered sequence of latent points.

    Errors from individual steps are re-raised with the step index
    attached.
    """
    samples = []
    for step, h in enumerate(points):
        try:
            samples.append(preimage(model, h, S))
        except GkpcaError as exc:
            raise type(exc)(f"step {step}: {exc}") from exc
    return samples


def traverse(model: "GenerativeKernelPCA", path: TraversalPath, S: int) -> list[GeneratedSample]:
    """Decode every latent point along ``path`` into input space."""
    if path.kind == ALONG_COMPONENT and path.start.shape[0] != model.n_components_:
        raise InputError("traversal start point length does not match model components")
    if path.kind == INTERPOLATE and path.endpoint_a.shape[0] != model.n_components_:
        raise InputError("traversal endpoints length does not match model components")
    return generate_sequence(model, path.latent_points(), S)
