"""Generative kernel PCA: latent exploration, pre-images, novelty detection."""

from .errors import (
    DegenerateSimilarityError,
    FormatError,
    GkpcaError,
    InputError,
    NumericError,
    UsageError,
)
from .generator import GeneratedSample, SimilarityVector, TraversalPath, preimage, similarity, traverse
from .ingest import Dataset, EcgConfig, ImageGrid, Signal, Tabular
from .kernels import CenteringStats, GramMatrix, KernelSpec, center, center_vector, eval_kernel, gram
from .model import GenerativeKernelPCA
from .model_io import load_model, save_model
from .novelty import NoveltyReport, novelty_report, novelty_score, novelty_scores

__all__ = [
    "CenteringStats",
    "Dataset",
    "DegenerateSimilarityError",
    "EcgConfig",
    "FormatError",
    "GeneratedSample",
    "GenerativeKernelPCA",
    "GkpcaError",
    "GramMatrix",
    "ImageGrid",
    "InputError",
    "KernelSpec",
    "NoveltyReport",
    "NumericError",
    "Signal",
    "SimilarityVector",
    "Tabular",
    "TraversalPath",
    "UsageError",
    "center",
    "center_vector",
    "eval_kernel",
    "gram",
    "load_model",
    "novelty_report",
    "novelty_score",
    "novelty_scores",
    "preimage",
    "save_model",
    "similarity",
    "traverse",
]

__version__ = "0.1.0"
