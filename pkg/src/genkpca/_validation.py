"""Input validation helpers used across the estimator and free functions."""

from __future__ import annotations

import numpy as np

from .errors import InputError


def check_matrix(X, name: str = "X", min_rows: int = 1) -> np.ndarray:
    """Coerce ``X`` to a finite 2-D float64 array."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise InputError(f"{name} must be 2-D, got shape {X.shape}")
    if X.shape[0] < min_rows:
        raise InputError(f"{name} needs at least {min_rows} rows, got {X.shape[0]}")
    if not np.all(np.isfinite(X)):
        raise InputError(f"{name} contains non-finite values")
    return X


def check_vector(v, length: int | None = None, name: str = "vector") -> np.ndarray:
    """Coerce ``v`` to a finite 1-D float64 array, optionally of fixed length."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise InputError(f"{name} must be 1-D, got shape {v.shape}")
    if length is not None and v.shape[0] != length:
        raise InputError(f"{name} has length {v.shape[0]}, expected {length}")
    if not np.all(np.isfinite(v)):
        raise InputError(f"{name} contains non-finite values")
    return v


def check_index(i: int, n: int, name: str = "index") -> int:
    i = int(i)
    if not 0 <= i < n:
        raise InputError(f"{name} {i} out of range [0, {n})")
    return i
