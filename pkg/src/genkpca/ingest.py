"""Dataset loading: IDX image files, numeric CSV, and the ECG beat pipeline.

The ECG path mirrors a standard beat-extraction chain: zero-phase
Butterworth bandpass, QRS detection (derivative, squaring,
moving-window integration, adaptive threshold with a refractory
period), then fixed-length epochs centered on each detected R-peak.
WFDB binaries are not parsed; signals are read as one plain-text sample
per line.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.signal

from ._validation import check_vector
from .errors import FormatError, InputError, NumericError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


# ---------------------------------------------------------------------------
# dataset container


@dataclass(frozen=True)
class ImageGrid:
    width: int
    height: int
    kind = "image_grid"


@dataclass(frozen=True)
class Signal:
    sample_rate_hz: float
    kind = "signal"


@dataclass(frozen=True)
class Tabular:
    kind = "tabular"


@dataclass
class Dataset:
    """N x d_in data matrix plus optional labels and a rendering kind."""

    X: np.ndarray
    labels: np.ndarray | None = None
    meta: ImageGrid | Signal | Tabular = field(default_factory=Tabular)


def meta_to_dict(meta) -> dict:
    if isinstance(meta, ImageGrid):
        return {"kind": "image_grid", "width": meta.width, "height": meta.height}
    if isinstance(meta, Signal):
        return {"kind": "signal", "sample_rate_hz": meta.sample_rate_hz}
    return {"kind": "tabular"}


def meta_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "image_grid":
        return ImageGrid(width=int(d["width"]), height=int(d["height"]))
    if kind == "signal":
        return Signal(sample_rate_hz=float(d["sample_rate_hz"]))
    if kind == "tabular":
        return Tabular()
    raise FormatError(f"unknown dataset kind {kind!r}")


# ---------------------------------------------------------------------------
# IDX (MNIST) files


def read_idx(path) -> np.ndarray:
    """Read an unsigned-byte IDX file into an ndarray of its stored shape."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < 4:
        raise FormatError(f"{path}: truncated IDX header")
    zero1, zero2, dtype, ndim = struct.unpack_from(">BBBB", raw, 0)
    if zero1 != 0 or zero2 != 0 or dtype != 0x08:
        raise FormatError(f"{path}: bad IDX magic {raw[:4].hex()}")
    header_len = 4 + 4 * ndim
    if len(raw) < header_len:
        raise FormatError(f"{path}: truncated IDX dimension table")
    dims = struct.unpack_from(f">{ndim}I", raw, 4)
    count = int(np.prod(dims))
    if len(raw) != header_len + count:
        raise FormatError(
            f"{path}: expected {count} data bytes for shape {dims}, found {len(raw) - header_len}"
        )
    return np.frombuffer(raw, dtype=np.uint8, offset=header_len).reshape(dims).copy()


def write_idx(path, array: np.ndarray) -> None:
    """Write an unsigned-byte array as an IDX file (inverse of ``read_idx``)."""
    array = np.ascontiguousarray(array, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">BBBB", 0, 0, 0x08, array.ndim))
        fh.write(struct.pack(f">{array.ndim}I", *array.shape))
        fh.write(array.tobytes())


def load_idx(images_path, labels_path, filter_digits=None, limit_per_class=None) -> Dataset:
    """Load an MNIST-style IDX image/label pair as a flattened dataset.

    Pixels are scaled to [0, 1].  With ``filter_digits`` only those
    classes are kept; ``limit_per_class`` keeps the first so-many items
    of each class in file order, so sampling is deterministic.
    """
    images = read_idx(images_path)
    if images.ndim != 3:
        raise FormatError(f"{images_path}: expected 3-D image file, got {images.ndim}-D")
    labels = read_idx(labels_path)
    if labels.ndim != 1:
        raise FormatError(f"{labels_path}: expected 1-D label file, got {labels.ndim}-D")
    if images.shape[0] != labels.shape[0]:
        raise FormatError(
            f"image/label count mismatch: {images.shape[0]} vs {labels.shape[0]}"
        )
    n, rows, cols = images.shape
    labels = labels.astype(np.int64)

    if filter_digits is not None:
        filter_digits = set(int(v) for v in filter_digits)
        if not filter_digits:
            raise InputError("filter_digits must not be empty")
        keep = np.isin(labels, sorted(filter_digits))
        images = images[keep]
        labels = labels[keep]

    if limit_per_class is not None:
        limit = int(limit_per_class)
        if limit < 1:
            raise InputError("limit_per_class must be >= 1")
        taken = []
        counts: dict[int, int] = {}
        for i, lab in enumerate(labels):
            if counts.get(int(lab), 0) < limit:
                counts[int(lab)] = counts.get(int(lab), 0) + 1
                taken.append(i)
        images = images[taken]
        labels = labels[taken]

    X = images.reshape(images.shape[0], rows * cols).astype(np.float64) / 255.0
    return Dataset(X=X, labels=labels, meta=ImageGrid(width=cols, height=rows))


# ---------------------------------------------------------------------------
# CSV


def load_csv(path, has_labels: bool = False, has_header: bool = False) -> Dataset:
    """Load a rectangular numeric CSV; optionally the last column is a label."""
    path = Path(path)
    rows: list[list[float]] = []
    labels: list[int] = []
    width = None
    with open(path, "r", newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if has_header and lineno == 1:
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise FormatError(
                    f"{path}: row {lineno} has {len(cells)} cells, expected {width}"
                )
            try:
                values = [float(c) for c in cells]
            except ValueError as exc:
                raise FormatError(f"{path}: row {lineno}: {exc}") from exc
            if has_labels:
                labels.append(int(values[-1]))
                values = values[:-1]
            rows.append(values)
    if not rows:
        raise FormatError(f"{path}: no data rows")
    X = np.asarray(rows, dtype=np.float64)
    return Dataset(
        X=X,
        labels=np.asarray(labels, dtype=np.int64) if has_labels else None,
        meta=Tabular(),
    )


def load_signal(path) -> np.ndarray:
    """Read a single-channel signal stored as one sample per line."""
    path = Path(path)
    values = []
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError as exc:
                raise FormatError(f"{path}: line {lineno}: {exc}") from exc
    return np.asarray(values, dtype=np.float64)


# ---------------------------------------------------------------------------
# ECG pipeline


@dataclass(frozen=True)
class EcgConfig:
    """Beat-extraction parameters: 1-60 Hz bandpass at 360 Hz, 0.5 s epochs."""

    sample_rate_hz: float = 360.0
    band_low_hz: float = 1.0
    band_high_hz: float = 60.0
    filter_order: int = 5
    window_seconds: float = 0.5
    epoch_samples: int = 180
    refractory_seconds: float = 0.2
    integration_seconds: float = 0.15

    def __post_init__(self):
        if not 0 < self.band_low_hz < self.band_high_hz < self.sample_rate_hz / 2:
            raise InputError(
                "band edges must satisfy 0 < low < high < sample_rate / 2"
            )
        if self.epoch_samples != round(self.sample_rate_hz * self.window_seconds):
            raise InputError(
                f"epoch_samples must equal sample_rate * window ({self.sample_rate_hz} * "
                f"{self.window_seconds}), got {self.epoch_samples}"
            )
        if self.filter_order < 1:
            raise InputError("filter_order must be >= 1")

    @property
    def refractory_samples(self) -> int:
        return int(round(self.refractory_seconds * self.sample_rate_hz))


def butterworth_bandpass(signal, cfg: EcgConfig) -> np.ndarray:
    """Zero-phase Butterworth bandpass via cascaded second-order sections.

    The filter is designed by bilinear transform with frequency
    prewarping and applied forward-backward, so the output has no phase
    distortion and the same length as the input.
    """
    signal = check_vector(signal, name="signal")
    if signal.shape[0] <= 6 * cfg.filter_order:
        raise InputError(
            f"signal too short for order-{cfg.filter_order} zero-phase filtering: "
            f"{signal.shape[0]} samples"
        )
    sos = scipy.signal.butter(
        cfg.filter_order,
        [cfg.band_low_hz, cfg.band_high_hz],
        btype="bandpass",
        output="sos",
        fs=cfg.sample_rate_hz,
    )
    for section in sos:
        poles = np.roots(section[3:])
        if np.any(np.abs(poles) >= 1.0):
            raise NumericError("designed filter has an unstable second-order section")
    return scipy.signal.sosfiltfilt(sos, signal)


def detect_r_peaks(filtered, cfg: EcgConfig) -> np.ndarray:
    """Locate R-peaks in a bandpassed signal.

    Derivative -> squaring -> moving-window integration -> threshold at
    mean + 0.6 * std of the integrated signal; candidate peaks are
    refined to the largest absolute deflection of the filtered signal
    nearby.  A refractory period keeps peaks at least
    ``cfg.refractory_samples`` apart, retaining the larger of any two
    conflicting candidates.  Returns ascending sample indices.
    """
    filtered = check_vector(filtered, name="filtered")
    n = filtered.shape[0]
    if n < 3:
        return np.asarray([], dtype=np.int64)

    derivative = np.gradient(filtered)
    squared = derivative**2
    window = max(1, int(round(cfg.integration_seconds * cfg.sample_rate_hz)))
    integrated = np.convolve(squared, np.ones(window) / window, mode="same")

    threshold = integrated.mean() + 0.6 * integrated.std()
    above = integrated > threshold
    if not above.any():
        return np.asarray([], dtype=np.int64)

    # One candidate per contiguous above-threshold region.
    padded = np.concatenate(([False], above, [False]))
    changes = np.diff(padded.astype(np.int8))
    starts = np.flatnonzero(changes == 1)
    stops = np.flatnonzero(changes == -1)

    candidates = []
    for a, b in zip(starts, stops):
        local = a + int(np.argmax(integrated[a:b]))
        lo = max(0, local - window)
        hi = min(n, local + window + 1)
        refined = lo + int(np.argmax(np.abs(filtered[lo:hi])))
        candidates.append(refined)
    candidates = sorted(set(candidates))

    # Refractory: greedily keep the largest-amplitude peaks.
    amplitude = np.abs(filtered)
    by_strength = sorted(candidates, key=lambda i: (-amplitude[i], i))
    kept: list[int] = []
    for cand in by_strength:
        if all(abs(cand - k) >= cfg.refractory_samples for k in kept):
            kept.append(cand)
    return np.asarray(sorted(kept), dtype=np.int64)


def extract_epochs(filtered, peaks, cfg: EcgConfig) -> Dataset:
    """Cut a fixed-length window around each peak with full margins.

    Windows span ``epoch_samples`` centered on the peak (half before,
    half after); peaks too close to either end are dropped.
    """
    filtered = check_vector(filtered, name="filtered")
    n = filtered.shape[0]
    before = cfg.epoch_samples // 2
    after = cfg.epoch_samples - before
    epochs = []
    for p in np.asarray(peaks, dtype=np.int64):
        if p - before >= 0 and p + after <= n:
            epochs.append(filtered[p - before : p + after])
    X = (
        np.stack(epochs)
        if epochs
        else np.empty((0, cfg.epoch_samples), dtype=np.float64)
    )
    return Dataset(X=X, labels=None, meta=Signal(sample_rate_hz=cfg.sample_rate_hz))


def ecg_beats(signal, cfg: EcgConfig | None = None) -> Dataset:
    """Full pipeline: bandpass, peak detection, epoch extraction."""
    cfg = cfg or EcgConfig()
    filtered = butterworth_bandpass(signal, cfg)
    peaks = detect_r_peaks(filtered, cfg)
    return extract_epochs(filtered, peaks, cfg)
