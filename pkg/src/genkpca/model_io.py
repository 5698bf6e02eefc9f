"""Binary model archive: magic ``GKPCA1``, JSON header, raw float64 arrays.

The layout is self-describing and byte-stable: saving a loaded model
reproduces the original file exactly.  The centered Gram matrix is not
stored; it is recomputed deterministically from the training data and
kernel spec on load.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from . import ingest, kernels
from .errors import FormatError
from .model import RANK_RTOL, GenerativeKernelPCA

MAGIC = b"GKPCA1"
VERSION = 1

_ARRAY_ORDER = ("X", "hidden_units", "eigenvalues", "row_means")


def save_model(path, model: GenerativeKernelPCA, meta=None, labels=None) -> None:
    """Write a fitted model (plus optional dataset meta and labels) to ``path``."""
    model._check_fitted()
    arrays = {
        "X": model.X_fit_,
        "hidden_units": model.hidden_units_,
        "eigenvalues": model.eigenvalues_,
        "row_means": model.centering_.row_means,
    }
    header = {
        "arrays": [{"name": name, "shape": list(arrays[name].shape)} for name in _ARRAY_ORDER],
        "grand_mean": model.centering_.grand_mean,
        "kernel": {"family": model.kernel_spec_.family, "bandwidth_sq": model.kernel_spec_.bandwidth_sq},
        "labels": None if labels is None else [int(v) for v in labels],
        "meta": None if meta is None else ingest.meta_to_dict(meta),
        "n_components": int(model.n_components_),
        "n_neighbors": int(model.n_neighbors),
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(bytes([VERSION]))
        fh.write(struct.pack("<I", len(header_bytes)))
        fh.write(header_bytes)
        for name in _ARRAY_ORDER:
            fh.write(np.ascontiguousarray(arrays[name], dtype="<f8").tobytes())


def load_model(path):
    """Load a model archive; returns ``(model, meta, labels)``.

    ``meta`` and ``labels`` are ``None`` when absent from the archive.
    """
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < len(MAGIC) + 5 or raw[: len(MAGIC)] != MAGIC:
        raise FormatError(f"{path}: not a GKPCA1 model archive")
    version = raw[len(MAGIC)]
    if version != VERSION:
        raise FormatError(f"{path}: unsupported archive version {version}")
    offset = len(MAGIC) + 1
    (header_len,) = struct.unpack_from("<I", raw, offset)
    offset += 4
    try:
        header = json.loads(raw[offset : offset + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: corrupt archive header: {exc}") from exc
    offset += header_len

    arrays = {}
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        if offset + nbytes > len(raw):
            raise FormatError(f"{path}: truncated archive (array {entry['name']})")
        arrays[entry["name"]] = np.frombuffer(raw, dtype="<f8", count=count, offset=offset).reshape(shape).copy()
        offset += nbytes

    spec = kernels.KernelSpec(
        family=header["kernel"]["family"], bandwidth_sq=header["kernel"]["bandwidth_sq"]
    )
    model = GenerativeKernelPCA(
        n_components=header["n_components"],
        kernel=spec.family,
        bandwidth_sq=spec.bandwidth_sq,
        n_neighbors=header["n_neighbors"],
    )
    X = arrays["X"]
    gram_centered, _ = kernels.center(kernels.gram(spec, X))
    model.X_fit_ = X
    model.kernel_spec_ = spec
    model.gram_ = gram_centered
    model.centering_ = kernels.CenteringStats(
        row_means=arrays["row_means"], grand_mean=header["grand_mean"]
    )
    model.hidden_units_ = arrays["hidden_units"]
    model.eigenvalues_ = arrays["eigenvalues"]
    model.active_components_ = model.eigenvalues_ > RANK_RTOL * float(model.eigenvalues_[0])
    model.n_samples_ = X.shape[0]
    model.n_features_in_ = X.shape[1]
    model.n_components_ = header["n_components"]

    labels = header.get("labels")
    labels = None if labels is None else np.asarray(labels, dtype=np.int64)
    meta_dict = header.get("meta")
    meta = None if meta_dict is None else ingest.meta_from_dict(meta_dict)
    return model, meta, labels
