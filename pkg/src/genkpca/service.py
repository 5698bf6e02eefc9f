"""HTTP JSON API over fitted models for the explorer UI.

Endpoints:

- ``POST /models``                 fit from inline data / CSV / IDX, or load an archive
- ``GET  /models/{id}``            model metadata (dimensions, spectrum, slider ranges)
- ``GET  /models/{id}/latent``     hidden units on two components + novelty overlay
- ``POST /models/{id}/generate``   pre-image of one latent point
- ``POST /models/{id}/traverse``   pre-images along a latent path

Models are immutable once registered, so all GETs are pure reads and
concurrent generation requests are safe.  Component indices in the API
are 1-based.
"""

from __future__ import annotations

import threading
from typing import Any

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import generator, ingest, model_io
from .errors import DegenerateSimilarityError, FormatError, InputError, NumericError
from .model import GenerativeKernelPCA
from .novelty import novelty_report

DEFAULT_PORT = 8642
NOVELTY_QUANTILE = 0.2


class ModelRegistry:
    """Thread-safe id -> (model, meta, labels) map with a novelty cache."""

    def __init__(self):
        self._lock = threading.Lock()
        self._entries: dict[str, dict[str, Any]] = {}
        self._counter = 0

    def add(self, model: GenerativeKernelPCA, meta=None, labels=None) -> str:
        with self._lock:
            self._counter += 1
            model_id = f"m{self._counter}"
            self._entries[model_id] = {
                "model": model,
                "meta": meta,
                "labels": labels,
                "novelty": None,
            }
        return model_id

    def get(self, model_id: str) -> dict[str, Any]:
        entry = self._entries.get(model_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown model id {model_id!r}")
        return entry

    def novelty(self, model_id: str):
        """Training-set novelty report, computed once per model and cached."""
        entry = self.get(model_id)
        if entry["novelty"] is None:
            entry["novelty"] = novelty_report(entry["model"], quantile=NOVELTY_QUANTILE)
        return entry["novelty"]


class FitRequest(BaseModel):
    model_path: str | None = None
    csv_path: str | None = None
    has_labels: bool = False
    has_header: bool = False
    images_path: str | None = None
    labels_path: str | None = None
    digits: list[int] | None = None
    per_class: int | None = None
    data: list[list[float]] | None = None
    labels: list[int] | None = None
    kernel: str = "gaussian"
    bandwidth_sq: float = 1.0
    n_components: int | None = None
    n_neighbors: int = 10


class GenerateRequest(BaseModel):
    h_star: list[float]
    S: int


class TraverseRequest(BaseModel):
    S: int
    steps: int
    mode: str = "component"
    component: int | None = None
    start_value: float | None = None
    stop_value: float | None = None
    start: list[float] | None = None
    start_index: int | None = None
    interpolate: list[int] | None = None
    points: list[list[float]] | None = None


def _render_hint(meta) -> dict:
    return ingest.meta_to_dict(meta if meta is not None else ingest.Tabular())


def _sample_payload(sample: generator.GeneratedSample, meta) -> dict:
    return {
        "x_hat": [float(v) for v in sample.x_hat],
        "h_star": [float(v) for v in sample.h_star],
        "neighbors": [
            {"index": i, "similarity": s} for i, s in sample.neighbors
        ],
        "render_hint": _render_hint(meta),
    }


def _fit_dataset(request: FitRequest) -> ingest.Dataset:
    if request.csv_path is not None:
        return ingest.load_csv(
            request.csv_path, has_labels=request.has_labels, has_header=request.has_header
        )
    if request.images_path is not None or request.labels_path is not None:
        if not (request.images_path and request.labels_path):
            raise InputError("images_path and labels_path must be given together")
        digits = set(request.digits) if request.digits is not None else None
        return ingest.load_idx(
            request.images_path,
            request.labels_path,
            filter_digits=digits,
            limit_per_class=request.per_class,
        )
    if request.data is not None:
        labels = None if request.labels is None else np.asarray(request.labels, dtype=np.int64)
        return ingest.Dataset(
            X=np.asarray(request.data, dtype=np.float64), labels=labels, meta=ingest.Tabular()
        )
    raise InputError("request must provide model_path, csv_path, images_path, or data")


def create_app(registry: ModelRegistry | None = None, ui_dir: str | None = None) -> FastAPI:
    registry = registry if registry is not None else ModelRegistry()
    app = FastAPI(title="genkpca service")
    app.state.registry = registry
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(InputError)
    async def _input_error(request: Request, exc: InputError):
        return JSONResponse(status_code=400, content={"error": exc.category, "detail": str(exc)})

    @app.exception_handler(FormatError)
    async def _format_error(request: Request, exc: FormatError):
        return JSONResponse(status_code=400, content={"error": exc.category, "detail": str(exc)})

    @app.exception_handler(NumericError)
    async def _numeric_error(request: Request, exc: NumericError):
        return JSONResponse(status_code=422, content={"error": exc.category, "detail": str(exc)})

    @app.exception_handler(DegenerateSimilarityError)
    async def _degenerate_error(request: Request, exc: DegenerateSimilarityError):
        return JSONResponse(status_code=409, content={"error": exc.category, "detail": str(exc)})

    @app.post("/models", status_code=201)
    def register_model(request: FitRequest):
        if request.model_path is not None:
            model, meta, labels = model_io.load_model(request.model_path)
        else:
            dataset = _fit_dataset(request)
            model = GenerativeKernelPCA(
                n_components=request.n_components,
                kernel=request.kernel,
                bandwidth_sq=request.bandwidth_sq,
                n_neighbors=request.n_neighbors,
            ).fit(dataset.X)
            meta, labels = dataset.meta, dataset.labels
        model_id = registry.add(model, meta, labels)
        return {
            "id": model_id,
            "n": model.n_samples_,
            "d": model.n_components_,
            "eigenvalues": [float(v) for v in model.eigenvalues_],
        }

    @app.get("/models/{model_id}")
    def model_info(model_id: str):
        entry = registry.get(model_id)
        model = entry["model"]
        hidden = model.hidden_units_
        return {
            "id": model_id,
            "n": model.n_samples_,
            "d": model.n_components_,
            "eigenvalues": [float(v) for v in model.eigenvalues_],
            "default_S": int(model.n_neighbors),
            "render_hint": _render_hint(entry["meta"]),
            "component_ranges": [
                {"min": float(row.min()), "max": float(row.max())} for row in hidden
            ],
        }

    @app.get("/models/{model_id}/latent")
    def latent(model_id: str, cx: int = 1, cy: int = 2):
        entry = registry.get(model_id)
        model = entry["model"]
        if not (1 <= cx <= model.n_components_ and 1 <= cy <= model.n_components_):
            raise InputError(
                f"components must lie in [1, {model.n_components_}], got cx={cx} cy={cy}"
            )
        report = registry.novelty(model_id)
        labels = entry["labels"]
        xs = model.hidden_units_[cx - 1]
        ys = model.hidden_units_[cy - 1]
        points = [
            {
                "i": i,
                "x": float(xs[i]),
                "y": float(ys[i]),
                "label": None if labels is None else int(labels[i]),
                "novelty_score": float(report.scores[i]),
                "flagged": bool(report.flags[i]),
            }
            for i in range(model.n_samples_)
        ]
        return {"points": points}

    @app.post("/models/{model_id}/generate")
    def generate(model_id: str, request: GenerateRequest):
        entry = registry.get(model_id)
        sample = generator.preimage(entry["model"], np.asarray(request.h_star), request.S)
        return _sample_payload(sample, entry["meta"])

    @app.post("/models/{model_id}/traverse")
    def traverse(model_id: str, request: TraverseRequest):
        entry = registry.get(model_id)
        model = entry["model"]
        if request.steps < 2 and request.points is None:
            raise InputError(f"steps must be >= 2, got {request.steps}")

        if request.mode == "points" or request.points is not None:
            points = [np.asarray(p, dtype=np.float64) for p in (request.points or [])]
            if not points:
                raise InputError("points mode requires a non-empty points list")
        elif request.mode == "interpolate" or request.interpolate is not None:
            if not request.interpolate or len(request.interpolate) != 2:
                raise InputError("interpolate mode needs two training indices")
            i, j = request.interpolate
            path = generator.TraversalPath.between(
                model.hidden_unit(i), model.hidden_unit(j), request.steps
            )
            points = path.latent_points()
        elif request.mode == "component":
            if request.component is None or request.start_value is None or request.stop_value is None:
                raise InputError("component mode needs component, start_value, stop_value")
            if request.component < 1:
                raise InputError("component indices are 1-based")
            if request.start is not None:
                start = np.asarray(request.start, dtype=np.float64)
            else:
                start = model.hidden_unit(request.start_index or 0)
            path = generator.TraversalPath.along_component(
                start, request.component - 1, request.start_value, request.stop_value, request.steps
            )
            points = path.latent_points()
        else:
            raise InputError(f"unknown traversal mode {request.mode!r}")

        samples = generator.generate_sequence(model, points, request.S)
        return {"steps": [_sample_payload(s, entry["meta"]) for s in samples]}

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
