"""Command line interface: fit models, run traversals, export novelty reports.

All operations are seedless and deterministic: identical configurations
produce byte-identical artifacts.  Errors are reported on stderr as one
``error:<category>:<message>`` line with a nonzero exit code.

Component indices on the command line are 1-based (component 1 is the
leading principal direction).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import generator, ingest, model_io, outputs
from .errors import GkpcaError, UsageError
from .model import GenerativeKernelPCA
from .novelty import novelty_report

DATA_DIR_ENV = "GKPCA_DATA_DIR"
MNIST_IMAGES_NAME = "train-images-idx3-ubyte"
MNIST_LABELS_NAME = "train-labels-idx1-ubyte"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="gkpca", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a model and write a model archive")
    fit.add_argument("--config", help="key=value config file; flags override it")
    fit.add_argument("--data", choices=["mnist", "csv", "ecg"], required=True)
    fit.add_argument("--images", help="IDX image file (mnist)")
    fit.add_argument("--labels", help="IDX label file (mnist)")
    fit.add_argument("--digits", help="comma-separated digit filter, e.g. 0,1")
    fit.add_argument("--per-class", type=int, help="keep first N items of each class")
    fit.add_argument("--path", help="CSV file (csv)")
    fit.add_argument("--has-labels", action="store_true", help="CSV last column is a label")
    fit.add_argument("--has-header", action="store_true", help="CSV first row is a header")
    fit.add_argument("--signal", help="plain-text sample-per-line signal file (ecg)")
    fit.add_argument("--epochs-csv", help="also write extracted ECG epochs to this CSV")
    fit.add_argument("--kernel", choices=["gaussian", "laplace"], default="gaussian")
    fit.add_argument("--sigma2", type=float, default=1.0, help="kernel bandwidth")
    fit.add_argument("--d", type=int, required=True, help="number of components")
    fit.add_argument("--S", type=int, default=10, help="default neighborhood size")
    fit.add_argument("--out", default="model.gkpca", help="model archive path")

    trav = sub.add_parser("traverse", help="decode a latent path into sample files")
    trav.add_argument("--config", help="key=value config file; flags override it")
    trav.add_argument("--model", required=True)
    trav.add_argument("--out", required=True, help="output directory")
    trav.add_argument("--steps", type=int, default=7)
    trav.add_argument("--S", type=int, help="neighborhood size (default: stored in model)")
    trav.add_argument("--component", type=int, help="1-based component to sweep")
    trav.add_argument("--from", dest="start_value", type=float, help="sweep start value")
    trav.add_argument("--to", dest="stop_value", type=float, help="sweep stop value")
    trav.add_argument("--start-index", type=int, default=0, help="training point whose hidden unit anchors the sweep")
    trav.add_argument("--start", help="explicit comma-separated start coordinates")
    trav.add_argument("--interpolate", help="i,j training indices to interpolate between")
    trav.add_argument("--manifest", help="replay the latent points of a manifest JSON")

    nov = sub.add_parser("novelty", help="score the training set and write a CSV report")
    nov.add_argument("--config", help="key=value config file; flags override it")
    nov.add_argument("--model", required=True)
    nov.add_argument("--quantile", type=float, default=0.2)
    nov.add_argument("--out", required=True, help="report CSV path")

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--port", type=int, default=8642)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--model", action="append", default=[], help="model archive to preload (repeatable)")
    serve.add_argument("--ui", help="directory of built UI assets to serve at /ui")

    return parser


def _apply_config_file(argv: list[str], parser: _Parser) -> list[str]:
    """Fold `key=value` lines from --config into the argv as defaults."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise UsageError("--config requires a file path")
    path = Path(argv[idx + 1])
    if not path.exists():
        raise UsageError(f"config file not found: {path}")
    injected: list[str] = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        flag = f"--{key.replace('_', '-')}"
        if flag in argv:
            continue  # explicit flags win
        if value.lower() == "true":
            injected.append(flag)
        else:
            injected.extend([flag, value])
    # Config defaults go right after the subcommand so later flags override.
    return argv[:1] + injected + argv[1:]


def _load_dataset(args) -> ingest.Dataset:
    data_dir = os.environ.get(DATA_DIR_ENV, "")
    if args.data == "mnist":
        images = args.images or (Path(data_dir) / MNIST_IMAGES_NAME if data_dir else None)
        labels = args.labels or (Path(data_dir) / MNIST_LABELS_NAME if data_dir else None)
        if not images or not labels:
            raise UsageError(
                f"--images/--labels required (or set {DATA_DIR_ENV} to a directory "
                f"containing {MNIST_IMAGES_NAME} and {MNIST_LABELS_NAME})"
            )
        digits = None
        if args.digits:
            digits = {int(v) for v in args.digits.split(",") if v != ""}
        return ingest.load_idx(images, labels, filter_digits=digits, limit_per_class=args.per_class)
    if args.data == "csv":
        path = args.path or (Path(data_dir) / "data.csv" if data_dir else None)
        if not path:
            raise UsageError("--path required for --data csv")
        return ingest.load_csv(path, has_labels=args.has_labels, has_header=args.has_header)
    # ecg
    signal_path = args.signal or (Path(data_dir) / "ecg.txt" if data_dir else None)
    if not signal_path:
        raise UsageError("--signal required for --data ecg")
    signal = ingest.load_signal(signal_path)
    dataset = ingest.ecg_beats(signal)
    if args.epochs_csv:
        with open(args.epochs_csv, "w") as fh:
            for row in dataset.X:
                fh.write(",".join(repr(float(v)) for v in row))
                fh.write("\n")
    return dataset


def cmd_fit(args) -> int:
    if args.d < 1:
        raise UsageError(f"--d must be >= 1, got {args.d}")
    if args.sigma2 <= 0:
        raise UsageError(f"--sigma2 must be > 0, got {args.sigma2}")
    if args.S < 1:
        raise UsageError(f"--S must be >= 1, got {args.S}")
    dataset = _load_dataset(args)
    est = GenerativeKernelPCA(
        n_components=args.d,
        kernel=args.kernel,
        bandwidth_sq=args.sigma2,
        n_neighbors=args.S,
    ).fit(dataset.X)
    model_io.save_model(args.out, est, meta=dataset.meta, labels=dataset.labels)
    top = est.eigenvalues_[:10]
    print(f"n={est.n_samples_} d={est.n_components_}")
    print("top eigenvalues: " + " ".join(f"{v:.6g}" for v in top))
    print(f"model written to {args.out}")
    return 0


def _resolve_start(args, model) -> np.ndarray:
    if args.start:
        return np.asarray([float(v) for v in args.start.split(",")], dtype=np.float64)
    return model.hidden_unit(args.start_index)


def cmd_traverse(args) -> int:
    model, meta, _labels = model_io.load_model(args.model)
    S = args.S if args.S is not None else model.n_neighbors
    modes = [bool(args.manifest), args.interpolate is not None, args.component is not None]
    if sum(modes) != 1:
        raise UsageError("exactly one of --component, --interpolate, --manifest is required")

    if args.manifest:
        manifest = outputs.read_manifest(args.manifest)
        points = [np.asarray(p, dtype=np.float64) for p in manifest["h_star"]]
        S = args.S if args.S is not None else int(manifest["S"])
        mode: dict = manifest["mode"]
    elif args.interpolate is not None:
        try:
            i, j = (int(v) for v in args.interpolate.split(","))
        except ValueError:
            raise UsageError("--interpolate expects two comma-separated indices, e.g. 3,17")
        path = generator.TraversalPath.between(model.hidden_unit(i), model.hidden_unit(j), args.steps)
        points = path.latent_points()
        mode = {"kind": "interpolate", "a": i, "b": j}
    else:
        if args.start_value is None or args.stop_value is None:
            raise UsageError("--from and --to are required with --component")
        if args.component < 1:
            raise UsageError(f"--component is 1-based, got {args.component}")
        start = _resolve_start(args, model)
        path = generator.TraversalPath.along_component(
            start, args.component - 1, args.start_value, args.stop_value, args.steps
        )
        points = path.latent_points()
        mode = {
            "kind": "component",
            "component": args.component,
            "from": args.start_value,
            "to": args.stop_value,
            "start": [float(v) for v in start],
        }

    samples = generator.generate_sequence(model, points, S)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for step, sample in enumerate(samples):
        if isinstance(meta, ingest.ImageGrid):
            outputs.write_pgm(
                out_dir / f"step_{step:03d}.pgm", sample.x_hat, meta.width, meta.height
            )
        else:
            outputs.write_waveform_csv(out_dir / f"step_{step:03d}.csv", sample.x_hat)
    outputs.write_manifest(out_dir / "manifest.json", mode, S, [s.h_star for s in samples])
    print(f"wrote {len(samples)} samples and manifest.json to {out_dir}")
    return 0


def cmd_novelty(args) -> int:
    if not 0.0 < args.quantile < 1.0:
        raise UsageError(f"--quantile must lie in (0, 1), got {args.quantile}")
    model, _meta, _labels = model_io.load_model(args.model)
    report = novelty_report(model, quantile=args.quantile)
    report.write_csv(args.out)
    print(f"threshold={report.threshold!r} flagged={report.flagged_count}/{len(report.scores)}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ModelRegistry, create_app

    registry = ModelRegistry()
    for path in args.model:
        model, meta, labels = model_io.load_model(path)
        model_id = registry.add(model, meta, labels)
        print(f"loaded {path} as {model_id}")
    app = create_app(registry=registry, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


_COMMANDS = {
    "fit": cmd_fit,
    "traverse": cmd_traverse,
    "novelty": cmd_novelty,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        if argv and argv[0] in _COMMANDS:
            argv = [argv[0]] + _apply_config_file(argv[1:], parser)
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except GkpcaError as exc:
        print(f"error:{exc.category}:{exc}", file=sys.stderr)
        return 1


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
