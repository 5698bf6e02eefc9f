"""Deterministic artifact writers: PGM images, waveform CSVs, manifests.

The traversal manifest records every latent point of a path in a JSON
schema shared with the explorer UI, so recorded paths can be replayed
through the CLI and reproduce the same sample files byte for byte.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import FormatError, InputError

MANIFEST_SCHEMA = "gkpca-traversal/1"


def write_pgm(path, values, width: int, height: int) -> None:
    """Write a [0, 1] intensity vector as a binary (P5) PGM image."""
    values = np.asarray(values, dtype=np.float64)
    if values.size != width * height:
        raise InputError(
            f"expected {width * height} pixel values for {width}x{height}, got {values.size}"
        )
    pixels = np.clip(np.round(values * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())


def read_pgm(path) -> tuple[np.ndarray, int, int]:
    """Read a binary PGM written by :func:`write_pgm`."""
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    if len(parts) != 4 or parts[0] != b"P5":
        raise FormatError(f"{path}: not a binary PGM file")
    width, height = (int(v) for v in parts[1].split())
    if parts[2] != b"255":
        raise FormatError(f"{path}: unsupported maxval {parts[2]!r}")
    pixels = np.frombuffer(parts[3], dtype=np.uint8, count=width * height)
    return pixels.astype(np.float64) / 255.0, width, height


def write_waveform_csv(path, values) -> None:
    """Write a sample vector as one value per line (full precision)."""
    values = np.asarray(values, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        for v in values:
            fh.write(repr(float(v)))
            fh.write("\n")


def write_manifest(path, mode: dict, S: int, points) -> None:
    """Record a traversal: its mode, neighborhood size, and h* per step."""
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "mode": mode,
        "S": int(S),
        "steps": len(points),
        "h_star": [[float(v) for v in p] for p in points],
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_manifest(path) -> dict:
    path = Path(path)
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc
    if manifest.get("schema") != MANIFEST_SCHEMA:
        raise FormatError(f"{path}: unsupported manifest schema {manifest.get('schema')!r}")
    points = manifest.get("h_star")
    if not isinstance(points, list) or not points:
        raise FormatError(f"{path}: manifest has no h_star entries")
    return manifest
