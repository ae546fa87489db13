"""Command-line front end: ``qupwm synth | extract | cv | report``.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 internal invariant failure. Failures print one JSON object on stderr,
e.g. ``{"error": "config", "field": "quantizer.levels", "message": "..."}``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .config import RunConfig
from .errors import ConfigError, DataError, InvariantError, QupwmError
from .evaluation import FoldReport, make_folds, run_cv
from .features import FeatureBundle, fit_features
from .signals import SampleSet, assemble_samples, dataset_files, read_record
from .synth import generate, write_dataset

log = logging.getLogger("qupwm")

CACHE_VERSION = 1


# --- framing with a content-addressed cache -----------------------------------


def dataset_digest(paths) -> str:
    """SHA-256 over the bytes of every record CSV and manifest under ``paths``."""
    if not paths:
        raise ConfigError("dataset", "no dataset path given")
    h = hashlib.sha256()
    for p in paths:
        for csv_path in dataset_files(p):
            for f in (csv_path, csv_path.with_suffix(".json")):
                h.update(f.name.encode() + b"\0")
                with open(f, "rb") as fh:
                    for block in iter(lambda: fh.read(1 << 20), b""):
                        h.update(block)
    return h.hexdigest()


def _frame_key(digest: str, config: RunConfig) -> str:
    subset = {
        "version": CACHE_VERSION,
        "dataset": digest,
        "frame": asdict(config.frame),
        "sampling": asdict(config.sampling),
    }
    return hashlib.sha256(json.dumps(subset, sort_keys=True).encode()).hexdigest()


def framed_samples(config: RunConfig, paths=None) -> tuple[SampleSet, str]:
    """Labeled samples for ``paths`` (default ``config.dataset``) and the dataset digest.

    The framing output is cached under ``config.cache_dir``, keyed by the
    content hash of the input files plus the frame and sampling settings,
    so sweeps over quantizer or motif settings skip the CSV parse.
    """
    paths = list(paths if paths is not None else config.dataset)
    digest = dataset_digest(paths)
    cache = None
    if config.cache_dir:
        cache = Path(config.cache_dir) / f"samples-{_frame_key(digest, config)[:32]}.npz"
        if cache.is_file():
            log.info("framing cache hit: %s", cache)
            with np.load(cache) as z:
                return SampleSet(z["values"], z["labels"], z["subjects"], z["starts"]), digest
    records = [read_record(f) for p in paths for f in dataset_files(p)]
    samples = assemble_samples(records, config.frame, config.sampling)
    if cache is not None:
        cache.parent.mkdir(parents=True, exist_ok=True)
        tmp = cache.with_suffix(f".{os.getpid()}.tmp")
        with open(tmp, "wb") as fh:
            np.savez(fh, values=samples.values, labels=samples.labels,
                     subjects=samples.subjects, starts=samples.starts)
        os.replace(tmp, cache)
    return samples, digest


# --- commands -------------------------------------------------------------------


def cmd_synth(config: RunConfig, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    files = write_dataset(generate(config.synth), out_dir)
    synth = config.to_dict()["synth"]
    (out_dir / "synth_config.json").write_text(json.dumps(synth, indent=2, sort_keys=True) + "\n")
    return files


def write_feature_csv(path: Path, names: list[str], X: np.ndarray, labels: np.ndarray) -> None:
    header = ",".join(names + ["label"])
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row, y in zip(X, labels):
            fh.write(",".join(f"{v:.12g}" for v in row) + f",{int(y)}\n")


def cmd_extract(
    config: RunConfig,
    out_csv: str | Path,
    train: list[str] | None = None,
    bundle_dir: str | Path | None = None,
) -> Path:
    """Write the feature CSV for ``config.dataset`` plus its JSON sidecar.

    The PWM bundle is either fitted on ``train`` (and saved next to the CSV
    as ``<stem>.bundle/``) or loaded from ``bundle_dir``. When the dataset
    is the training set itself, rows are scored the way ``cv`` scores
    training rows (``pwm.train_scoring``).
    """
    if not train and bundle_dir is None:
        raise ConfigError("train", "extract needs a training set (--train) or a saved bundle (--bundle)")
    if train and bundle_dir is not None:
        raise ConfigError("train", "give either --train or --bundle, not both")
    out_csv = Path(out_csv)
    out_csv.parent.mkdir(parents=True, exist_ok=True)

    if train:
        train_set, _ = framed_samples(config, train)
        bundle = fit_features(train_set, config.features)
        bundle.save(out_csv.with_suffix(".bundle"))
        same = not config.dataset or _same_paths(config.dataset, train)
        samples = train_set if same else framed_samples(config)[0]
        X = bundle.training_features(samples) if same else bundle.transform(samples.values)
    else:
        bundle = FeatureBundle.load(bundle_dir)
        if not config.dataset:
            raise ConfigError("dataset", "extract with --bundle needs --dataset")
        samples, _ = framed_samples(config)
        X = bundle.transform(samples.values)

    names = bundle.feature_names()
    if X.shape[1] != len(names) or X.shape[1] != bundle.n_features:
        raise InvariantError(f"feature matrix has {X.shape[1]} columns, expected {bundle.n_features}")
    write_feature_csv(out_csv, names, X, samples.labels)
    q = bundle.quantizer
    sidecar = {
        "M": q.levels if q else None,
        "r": q.resolution if q else None,
        "mu": q.centroid if q else None,
        "L": config.frame.frame_len,
        "step": config.frame.step,
        "orders": list(bundle.config.orders) if bundle.config.method == "mpwm" else None,
        "method": bundle.config.method,
        "n_samples": len(samples),
        "n_features": len(names),
        "bundle_sha256": bundle.fingerprint(),
    }
    out_csv.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return out_csv


def _same_paths(a, b) -> bool:
    return sorted(str(Path(p).resolve()) for p in a) == sorted(str(Path(p).resolve()) for p in b)


def cmd_cv(config: RunConfig, out_path: str | Path | None = None) -> FoldReport:
    samples, digest = framed_samples(config)
    folds = make_folds(samples, config.cv)
    covered = np.sort(np.concatenate(folds))
    if not np.array_equal(covered, np.arange(len(samples))):
        raise InvariantError("folds do not partition the samples")
    echo = {
        "dataset": list(config.dataset),
        "dataset_sha256": digest,
        "frame": asdict(config.frame),
        "sampling": asdict(config.sampling),
    }
    report = run_cv(
        samples,
        config.features,
        config.classifier,
        config.cv,
        folds=folds,
        config_echo=echo,
        progress=lambda r: log.info("fold %d: accuracy %.2f", r.fold, r.accuracy),
    )
    if out_path is not None:
        out_path = Path(out_path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(report.to_json())
    return report


def _read_report(path: str | Path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"missing report: {path}")
    try:
        d = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid report JSON {path}: {exc}") from None
    if not isinstance(d, dict) or not {"per_fold", "mean", "config_echo"} <= d.keys():
        raise DataError(f"{path}: not a cross-validation report")
    return d


def _fmt(v) -> str:
    return "-" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.2f}"


def report_rows(reports: list[dict]) -> list[dict]:
    rows = []
    for d in reports:
        echo = d["config_echo"]
        feats = echo.get("features", {})
        method = feats.get("method", "?")
        q = feats.get("quantizer", {})
        quantized = method != "raw"
        if not quantized:
            r = "-"
        elif q.get("resolution_sigma") is not None:
            r = f"{q['resolution_sigma']:g}*sigma"
        else:
            r = f"{q.get('resolution'):g}"
        rows.append(
            {
                "Method": {"raw": "Raw data", "pwm": "PWM", "mpwm": "mPWM"}.get(method, method),
                "M": str(q.get("levels")) if quantized else "-",
                "r": r,
                "j": ",".join(map(str, feats.get("orders", []))) if method == "mpwm" else "-",
                "L": str(echo.get("frame", {}).get("frame_len", "?")),
                "Feature size": str(d.get("feature_size", "?")),
                "Accuracy": _fmt(d["mean"].get("accuracy")),
                "Sensitivity": _fmt(d["mean"].get("sensitivity")),
                "Specificity": _fmt(d["mean"].get("specificity")),
            }
        )
    return rows


def format_table(rows: list[dict], markdown: bool = False) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    width = {c: max(len(c), *(len(r[c]) for r in rows)) for c in cols}
    if markdown:
        lines = ["| " + " | ".join(cols) + " |", "|" + "|".join("---" for _ in cols) + "|"]
        lines += ["| " + " | ".join(r[c] for c in cols) + " |" for r in rows]
    else:
        lines = ["  ".join(c.ljust(width[c]) for c in cols)]
        lines.append("  ".join("-" * width[c] for c in cols))
        lines += ["  ".join(r[c].ljust(width[c]) for c in cols) for r in rows]
    return "\n".join(lines) + "\n"


def cmd_report(paths: list[str], markdown: bool = False) -> str:
    """Comparison table (method, quantizer, frame length, feature size, metrics)."""
    if not paths:
        raise ConfigError("reports", "at least one report path is required")
    return format_table(report_rows([_read_report(p) for p in paths]), markdown)


# --- argument parsing -----------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError("argv", message)


_SHORTCUTS = [
    # flag, key(s), type, help
    ("--method", ("method",), str, "raw, pwm or mpwm"),
    ("--frame-len", ("frame.frame_len",), int, "frame length L"),
    ("--step", ("frame.step",), int, "frame step"),
    ("--levels", ("quantizer.levels",), int, "quantization levels M"),
    ("--C", ("classifier.C",), float, "SVM regularisation"),
    ("--k", ("cv.k",), int, "number of folds"),
    ("--cv-mode", ("cv.mode",), str, "sample-stratified or subject-held-out"),
    ("--cache-dir", ("cache_dir",), str, "framing cache directory"),
]


def _common(p: argparse.ArgumentParser, pipeline: bool) -> None:
    p.add_argument("--config", help="YAML or JSON run configuration")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config field, e.g. quantizer.levels=12")
    p.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")
    if not pipeline:
        return
    p.add_argument("--dataset", nargs="+", help="record CSV files or directories")
    for flag, _, typ, help_ in _SHORTCUTS:
        p.add_argument(flag, type=typ, help=help_, dest=flag[2:].replace("-", "_"))
    p.add_argument("--resolution", type=float, help="quantizer resolution r in signal units")
    p.add_argument("--resolution-sigma", type=float, help="quantizer resolution as a multiple of pooled sigma")
    p.add_argument("--orders", type=int, nargs="+", help="motif orders, e.g. 1 2")
    p.add_argument("--seed", type=int, help="seed for sampling, folds and the SVM")
    p.add_argument("--no-cache", action="store_true", help="disable the framing cache")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qupwm", description="Quantized PWM spike detection pipeline.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a seeded synthetic dataset")
    _common(p, pipeline=False)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="synth seed")
    p.add_argument("--amplitude", type=float, help="spike amplitude multiplier (1 = no spikes)")

    p = sub.add_parser("extract", help="write a feature CSV")
    _common(p, pipeline=True)
    p.add_argument("--train", nargs="+", help="training-set records to fit the PWMs on")
    p.add_argument("--bundle", help="previously saved bundle directory")
    p.add_argument("--out", required=True, help="feature CSV path")

    p = sub.add_parser("cv", help="cross-validate one method")
    _common(p, pipeline=True)
    p.add_argument("--out", help="report JSON path (default: JSON on stdout)")

    p = sub.add_parser("report", help="compare cross-validation reports")
    p.add_argument("reports", nargs="+", help="report JSON files")
    p.add_argument("--markdown", action="store_true", help="emit a markdown table")
    p.add_argument("--out", help="write the table to a file")
    return parser


def config_from_args(args) -> RunConfig:
    overrides = []
    if args.command == "synth":
        if args.seed is not None:
            overrides.append(("synth.seed", args.seed))
        if args.amplitude is not None:
            overrides.append(("synth.amplitude", args.amplitude))
    else:
        if args.dataset:
            overrides.append(("dataset", list(args.dataset)))
        for flag, keys, _, _ in _SHORTCUTS:
            v = getattr(args, flag[2:].replace("-", "_"))
            if v is not None:
                overrides += [(k, v) for k in keys]
        if args.resolution is not None:
            overrides += [("quantizer.resolution", args.resolution), ("quantizer.resolution_sigma", None)]
        if args.resolution_sigma is not None:
            overrides += [("quantizer.resolution_sigma", args.resolution_sigma), ("quantizer.resolution", None)]
        if args.orders:
            overrides.append(("motifs.orders", list(args.orders)))
        if args.seed is not None:
            overrides += [(k, args.seed) for k in ("sampling.seed", "cv.seed", "classifier.seed")]
        if args.no_cache:
            overrides.append(("cache_dir", None))
    overrides += [cfgmod.parse_override(s) for s in args.set]
    return cfgmod.load_config(args.config, overrides)


def _run(args) -> int:
    if args.command == "report":
        table = cmd_report(args.reports, args.markdown)
        if args.out:
            Path(args.out).write_text(table)
        else:
            sys.stdout.write(table)
        return 0

    config = config_from_args(args)
    if args.command == "synth":
        files = cmd_synth(config, args.out)
        print(json.dumps({"written": len(files), "out": str(args.out)}))
    elif args.command == "extract":
        path = cmd_extract(config, args.out, args.train, args.bundle)
        print(json.dumps({"features": str(path), "sidecar": str(path.with_suffix(".json"))}))
    elif args.command == "cv":
        report = cmd_cv(config, args.out)
        if args.out:
            sys.stdout.write(format_table(report_rows([report.to_dict()])))
        else:
            sys.stdout.write(report.to_json())
    return 0


def _error_line(kind: str, message: str, field: str | None = None) -> str:
    d = {"error": kind, "message": message}
    if field is not None:
        d["field"] = field
    return json.dumps(d, sort_keys=True)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(
            level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
            format="%(name)s: %(message)s",
        )
        return _run(args)
    except ConfigError as exc:
        print(_error_line(exc.kind, exc.message, exc.field), file=sys.stderr)
        return exc.exit_code
    except QupwmError as exc:
        print(_error_line(exc.kind, str(exc)), file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(_error_line("data", str(exc)), file=sys.stderr)
        return DataError.exit_code
    except Exception as exc:  # noqa: BLE001 - last-resort mapping onto the exit-code contract
        print(_error_line("internal", f"{type(exc).__name__}: {exc}"), file=sys.stderr)
        return InvariantError.exit_code


if __name__ == "__main__":
    sys.exit(main())
