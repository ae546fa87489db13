"""Feature extraction stage: quantizer + PWM fitting and sample transformation.

A :class:`FeatureBundle` holds everything fitted on a training set (pooled
statistics, the resolved quantizer, the PWMs) and turns raw sample rows
into the feature matrix of one method:

* ``raw``  -- the ``L * C`` signal values themselves,
* ``pwm``  -- two standard PWM scores,
* ``mpwm`` -- two scores per motif of the configured orders.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .motifs import NEGATIVE_MODES, MotifPwmSet, MotifSet, build_motif_pwms, mpwm_features
from .pwm import PwmPair, build_pwm_pair, pwm_features
from .quantizer import PooledStats, QuantizerConfig, QuantizerSpec, quantize, sample_stats
from .signals import NEGATIVE, POSITIVE, SampleSet

METHODS = ("raw", "pwm", "mpwm")
TRAIN_SCORING = ("leave-one-out", "plain")


@dataclass(frozen=True)
class FeatureConfig:
    method: str = "mpwm"
    quantizer: QuantizerConfig = field(default_factory=QuantizerConfig)
    orders: tuple[int, ...] = (1, 2)
    negative_mode: str = "absence"
    pseudocount: float = 0.0
    train_scoring: str = "leave-one-out"

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ConfigError("method", f"must be one of {METHODS}, got {self.method!r}")
        if self.method == "mpwm" and not self.orders:
            raise ConfigError("motifs.orders", "mpwm needs at least one motif order")
        if self.negative_mode not in NEGATIVE_MODES:
            raise ConfigError("motifs.negative_mode", f"must be one of {NEGATIVE_MODES}")
        if self.pseudocount < 0:
            raise ConfigError("pwm.pseudocount", "must be >= 0")
        if self.train_scoring not in TRAIN_SCORING:
            raise ConfigError("pwm.train_scoring", f"must be one of {TRAIN_SCORING}")
        object.__setattr__(self, "orders", tuple(self.orders))

    def feature_size(self, sample_len: int) -> int:
        if self.method == "raw":
            return sample_len
        if self.method == "pwm":
            return 2
        return MotifSet(self.quantizer.levels, self.orders).n_features

    def echo(self) -> dict:
        d = asdict(self)
        d["orders"] = list(self.orders)
        return d


@dataclass
class FeatureBundle:
    config: FeatureConfig
    sample_len: int
    stats: PooledStats | None = None
    quantizer: QuantizerSpec | None = None
    pwm: PwmPair | None = None
    motif_pwms: MotifPwmSet | None = None

    @property
    def n_features(self) -> int:
        return self.config.feature_size(self.sample_len)

    def feature_names(self) -> list[str]:
        if self.config.method == "raw":
            return [f"x_{i}" for i in range(self.sample_len)]
        if self.config.method == "pwm":
            return ["pwm_pos", "pwm_neg"]
        return self.motif_pwms.motifs.feature_names()

    def transform(self, values: np.ndarray, self_labels=None) -> np.ndarray:
        """Feature matrix for sample rows.

        Pass ``self_labels`` only for the very rows the bundle was fitted on;
        they are then scored with their own PWM contribution left out.
        """
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != self.sample_len:
            raise DataError(
                f"samples must have {self.sample_len} values, got array of shape {values.shape}"
            )
        if self.config.method == "raw":
            return values.copy()
        q = quantize(values, self.quantizer)
        if self.config.method == "pwm":
            return pwm_features(q, self.pwm, self.config.pseudocount, self_labels)
        return mpwm_features(q, self.motif_pwms, self_labels)

    def training_features(self, train: SampleSet) -> np.ndarray:
        """Features of the training rows, honouring ``config.train_scoring``."""
        if self.config.train_scoring == "plain" or self.config.method == "raw":
            return self.transform(train.values)
        counts = self.pwm if self.pwm is not None else self.motif_pwms
        n_pos = int(np.sum(train.labels == POSITIVE))
        if (counts.n_pos, counts.n_neg) != (n_pos, len(train) - n_pos):
            raise DataError("training_features called with rows the bundle was not fitted on")
        return self.transform(train.values, train.labels)

    def fingerprint(self) -> str:
        """SHA-256 over every fitted artefact, for byte-level comparisons."""
        h = hashlib.sha256()
        h.update(json.dumps(asdict(self.stats) if self.stats else None, sort_keys=True).encode())
        h.update(json.dumps(asdict(self.quantizer) if self.quantizer else None, sort_keys=True).encode())
        if self.pwm is not None:
            h.update(self.pwm.positive.tobytes())
            h.update(self.pwm.negative.tobytes())
        if self.motif_pwms is not None:
            for k in self.motif_pwms.motifs.orders:
                h.update(self.motif_pwms.pos_counts[k].tobytes())
                h.update(self.motif_pwms.neg_counts[k].tobytes())
        return h.hexdigest()

    def save(self, directory: str | Path) -> Path:
        """Persist as ``bundle.json`` plus ``pwm.npz`` / ``mpwm.npz`` in ``directory``."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        meta = {
            "config": self.config.echo(),
            "sample_len": self.sample_len,
            "stats": asdict(self.stats) if self.stats else None,
            "quantizer": asdict(self.quantizer) if self.quantizer else None,
        }
        (directory / "bundle.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        if self.pwm is not None:
            self.pwm.save(directory / "pwm.npz")
        if self.motif_pwms is not None:
            self.motif_pwms.save(directory / "mpwm.npz")
        return directory

    @classmethod
    def load(cls, directory: str | Path) -> FeatureBundle:
        directory = Path(directory)
        path = directory / "bundle.json"
        if not path.is_file():
            raise DataError(f"not a feature bundle: {directory}")
        meta = json.loads(path.read_text())
        cfg = meta["config"]
        config = FeatureConfig(
            method=cfg["method"],
            quantizer=QuantizerConfig(**cfg["quantizer"]),
            orders=tuple(cfg["orders"]),
            negative_mode=cfg["negative_mode"],
            pseudocount=cfg["pseudocount"],
            train_scoring=cfg.get("train_scoring", "leave-one-out"),
        )
        stats = None
        if meta["stats"]:
            s = meta["stats"]
            stats = PooledStats(s["mean"], s["std"], tuple(tuple(p) for p in s["per_subject"]))
        bundle = cls(config, meta["sample_len"], stats)
        if meta["quantizer"]:
            bundle.quantizer = QuantizerSpec(**meta["quantizer"])
        if (directory / "pwm.npz").is_file():
            bundle.pwm = PwmPair.load(directory / "pwm.npz")
        if (directory / "mpwm.npz").is_file():
            bundle.motif_pwms = MotifPwmSet.load(directory / "mpwm.npz")
        return bundle


def fit_features(train: SampleSet, config: FeatureConfig) -> FeatureBundle:
    """Fit statistics, quantizer and PWMs on ``train`` only."""
    bundle = FeatureBundle(config, train.n_features)
    if config.method == "raw":
        return bundle
    if config.quantizer.needs_stats:
        bundle.stats = sample_stats(train.values, train.subjects)
    bundle.quantizer = config.quantizer.resolve(bundle.stats)
    q = quantize(train.values, bundle.quantizer)
    pos, neg = q[train.labels == POSITIVE], q[train.labels == NEGATIVE]
    if config.method == "pwm":
        bundle.pwm = build_pwm_pair(pos, neg, bundle.quantizer.levels)
    else:
        motifs = MotifSet(bundle.quantizer.levels, config.orders)
        bundle.motif_pwms = build_motif_pwms(pos, neg, motifs, config.negative_mode)
    return bundle
