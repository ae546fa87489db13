"""Run configuration: a YAML (or JSON) file plus dotted-path overrides.

Layout, with every key optional::

    dataset: [data/]
    frame: {frame_len: 100, step: 2}
    sampling: {max_windows_per_spike: 1, n_negatives: null, seed: 0}
    method: mpwm
    quantizer: {levels: 10, resolution: 0.15, resolution_sigma: null, centroid: pooled}
    motifs: {orders: [1, 2], negative_mode: absence}
    pwm: {pseudocount: 0.0, train_scoring: leave-one-out}
    classifier: {C: 1.0, seed: 0, tol: 0.001, max_iter: 2000}
    cv: {k: 5, seed: 0, mode: sample-stratified}
    synth: {seed: 7, amplitude: 2.5, ...}
    cache_dir: .qupwm-cache

Every violation is reported as a :class:`ConfigError` naming the field.
"""

from __future__ import annotations

import copy
import dataclasses
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError
from .evaluation import ClassifierConfig, CvConfig
from .features import FeatureConfig
from .motifs import MotifSet
from .quantizer import QuantizerConfig
from .signals import FrameSpec, SamplingPolicy
from .synth import SynthConfig

DEFAULT_CACHE_DIR = ".qupwm-cache"

_TOP_LEVEL = {
    "dataset", "frame", "sampling", "method", "quantizer", "motifs",
    "pwm", "classifier", "cv", "synth", "cache_dir",
}
_MOTIF_KEYS = {"orders", "negative_mode"}
_PWM_KEYS = {"pseudocount", "train_scoring"}


@dataclass(frozen=True)
class RunConfig:
    dataset: tuple[str, ...] = ()
    frame: FrameSpec = field(default_factory=FrameSpec)
    # one window per spike keeps overlapping near-duplicates out of the folds
    sampling: SamplingPolicy = field(default_factory=lambda: SamplingPolicy(max_windows_per_spike=1))
    features: FeatureConfig = field(default_factory=FeatureConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    cv: CvConfig = field(default_factory=CvConfig)
    synth: SynthConfig = field(default_factory=SynthConfig)
    cache_dir: str | None = DEFAULT_CACHE_DIR

    def to_dict(self) -> dict:
        """Plain nested mapping in the file layout; round-trips through :func:`from_dict`."""
        feats = self.features
        synth = asdict(self.synth)
        for key in ("mean_range", "std_range"):
            synth[key] = list(synth[key])
        return {
            "dataset": list(self.dataset),
            "frame": asdict(self.frame),
            "sampling": asdict(self.sampling),
            "method": feats.method,
            "quantizer": asdict(feats.quantizer),
            "motifs": {"orders": list(feats.orders), "negative_mode": feats.negative_mode},
            "pwm": {"pseudocount": feats.pseudocount, "train_scoring": feats.train_scoring},
            "classifier": asdict(self.classifier),
            "cv": asdict(self.cv),
            "synth": synth,
            "cache_dir": self.cache_dir,
        }

    def replace(self, **changes) -> RunConfig:
        return dataclasses.replace(self, **changes)


def _mapping(raw: Any, name: str) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(name, f"expected a mapping, got {type(raw).__name__}")
    return raw


def _build(cls, raw: Any, name: str, base: dict | None = None, allowed: set[str] | None = None):
    raw = _mapping(raw, name)
    allowed = allowed if allowed is not None else {f.name for f in dataclasses.fields(cls)}
    for key in raw:
        if key not in allowed:
            raise ConfigError(f"{name}.{key}", "unknown field")
    kwargs = dict(base or {})
    kwargs.update(raw)
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(name, str(exc)) from None


def _check_type(value, types, field_name: str, what: str) -> None:
    if isinstance(value, bool) or not isinstance(value, types):
        raise ConfigError(field_name, f"must be {what}, got {value!r}")


def _validate_numbers(d: dict) -> None:
    """Reject wrongly typed scalars up front, before they reach numpy."""
    ints = {
        "frame": ("frame_len", "step"),
        "classifier": ("seed", "max_iter"),
        "cv": ("k", "seed"),
        "quantizer": ("levels",),
        "synth": ("n_subjects", "n_channels", "n_timepoints", "spikes_per_record", "seed"),
    }
    for section, keys in ints.items():
        for key in keys:
            if key in d.get(section, {}):
                _check_type(d[section][key], int, f"{section}.{key}", "an integer")
    floats = {
        "classifier": ("C", "tol"),
        "quantizer": ("resolution", "resolution_sigma"),
        "pwm": ("pseudocount",),
        "synth": ("amplitude", "affected_fraction", "smoothing", "sample_rate_hz"),
    }
    for section, keys in floats.items():
        for key in keys:
            v = d.get(section, {}).get(key)
            if v is not None:
                _check_type(v, (int, float), f"{section}.{key}", "a number")
    for key in ("max_windows_per_spike", "n_negatives", "seed"):
        v = d.get("sampling", {}).get(key)
        if v is not None:
            _check_type(v, int, f"sampling.{key}", "an integer")


def from_dict(raw: Any) -> RunConfig:
    d = _mapping(raw, "config")
    for key in d:
        if key not in _TOP_LEVEL:
            raise ConfigError(key, "unknown field")
    d = {k: (v if k in ("dataset", "method", "cache_dir") else _mapping(v, k)) for k, v in d.items()}
    _validate_numbers(d)

    dataset = d.get("dataset") or ()
    if isinstance(dataset, str):
        dataset = (dataset,)
    if not isinstance(dataset, (list, tuple)) or not all(isinstance(p, str) for p in dataset):
        raise ConfigError("dataset", "must be a path or a list of paths")

    defaults = RunConfig()
    frame = _build(FrameSpec, d.get("frame"), "frame")
    sampling = _build(SamplingPolicy, d.get("sampling"), "sampling", asdict(defaults.sampling))
    quantizer = _build(QuantizerConfig, d.get("quantizer"), "quantizer")

    motifs = _mapping(d.get("motifs"), "motifs")
    pwm = _mapping(d.get("pwm"), "pwm")
    for name, section, allowed in (("motifs", motifs, _MOTIF_KEYS), ("pwm", pwm, _PWM_KEYS)):
        for key in section:
            if key not in allowed:
                raise ConfigError(f"{name}.{key}", "unknown field")
    orders = motifs.get("orders", [1, 2])
    if isinstance(orders, int) and not isinstance(orders, bool):
        orders = [orders]
    if not isinstance(orders, (list, tuple)) or not all(
        isinstance(k, int) and not isinstance(k, bool) and k >= 1 for k in orders
    ):
        raise ConfigError("motifs.orders", f"must be a list of positive integers, got {orders!r}")
    method = d.get("method", "mpwm")
    if not isinstance(method, str):
        raise ConfigError("method", f"must be a string, got {method!r}")
    features = FeatureConfig(
        method=method,
        quantizer=quantizer,
        orders=tuple(sorted(set(orders))),
        negative_mode=motifs.get("negative_mode", "absence"),
        pseudocount=float(pwm.get("pseudocount", 0.0)),
        train_scoring=pwm.get("train_scoring", "leave-one-out"),
    )
    if method == "mpwm":
        # validates orders against the motif-length limit
        MotifSet(quantizer.levels, features.orders)

    synth_raw = dict(_mapping(d.get("synth"), "synth"))
    for key in ("mean_range", "std_range"):
        if key in synth_raw:
            v = synth_raw[key]
            if not isinstance(v, (list, tuple)) or len(v) != 2:
                raise ConfigError(f"synth.{key}", "must be a [low, high] pair")
            synth_raw[key] = tuple(float(x) for x in v)

    cache_dir = d.get("cache_dir", DEFAULT_CACHE_DIR)
    if cache_dir is not None and not isinstance(cache_dir, str):
        raise ConfigError("cache_dir", "must be a path or null")

    return RunConfig(
        dataset=tuple(dataset),
        frame=frame,
        sampling=sampling,
        features=features,
        classifier=_build(ClassifierConfig, d.get("classifier"), "classifier"),
        cv=_build(CvConfig, d.get("cv"), "cv"),
        synth=_build(SynthConfig, synth_raw, "synth"),
        cache_dir=cache_dir,
    )


def parse_override(text: str) -> tuple[str, Any]:
    """``"quantizer.levels=12"`` -> ``("quantizer.levels", 12)``; values parse as YAML."""
    key, sep, value = text.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError("set", f"expected KEY=VALUE, got {text!r}")
    try:
        return key, yaml.safe_load(value)
    except yaml.YAMLError as exc:
        raise ConfigError(key, f"unparseable value {value!r}: {exc}") from None


def apply_overrides(raw: dict, overrides: list[tuple[str, Any]]) -> dict:
    out = copy.deepcopy(raw)
    for key, value in overrides:
        parts = key.split(".")
        node = out
        for i, part in enumerate(parts[:-1]):
            child = node.get(part)
            if child is None:
                child = node[part] = {}
            elif not isinstance(child, dict):
                raise ConfigError(".".join(parts[: i + 1]), "is not a section")
            node = child
        node[parts[-1]] = value
    return out


def read_config_file(path: str | Path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config", f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"cannot parse {path}: {exc}") from None
    return _mapping(raw, "config")


def load_config(path: str | Path | None = None, overrides: list[tuple[str, Any]] = ()) -> RunConfig:
    raw = read_config_file(path) if path is not None else {}
    return from_dict(apply_overrides(raw, list(overrides)))
