"""Detection metrics, fold construction and leakage-safe cross-validation."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, DataError
from .features import FeatureBundle, FeatureConfig, fit_features
from .signals import SampleSet
from .svm import LinearModel, predict, train

CV_MODES = ("sample-stratified", "subject-held-out")


@dataclass(frozen=True)
class ClassifierConfig:
    C: float = 1.0
    seed: int = 0
    tol: float = 1e-3
    max_iter: int = 2000

    def __post_init__(self) -> None:
        if not self.C > 0:
            raise ConfigError("classifier.C", "must be positive")


@dataclass(frozen=True)
class CvConfig:
    k: int = 5
    seed: int = 0
    mode: str = "sample-stratified"

    def __post_init__(self) -> None:
        if self.k < 2:
            raise ConfigError("cv.k", "must be >= 2")
        if self.mode not in CV_MODES:
            raise ConfigError("cv.mode", f"must be one of {CV_MODES}")


@dataclass
class FoldResult:
    fold: int
    tp: int
    tn: int
    fp: int
    fn: int
    n_train: int
    n_test: int
    accuracy: float
    sensitivity: float
    specificity: float


@dataclass
class FoldReport:
    per_fold: list[FoldResult]
    mean: dict[str, float]
    feature_size: int
    config_echo: dict = field(default_factory=dict)
    artifacts: list[FeatureBundle] = field(default_factory=list, repr=False)
    models: list[LinearModel] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "per_fold": [asdict(f) for f in self.per_fold],
            "mean": dict(self.mean),
            "feature_size": self.feature_size,
            "config_echo": self.config_echo,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _pct(num: int, den: int) -> float:
    return 100.0 * num / den if den else math.nan


def confusion(y_true, y_pred) -> tuple[int, int, int, int]:
    """``(tp, tn, fp, fn)`` with 1 as the positive class."""
    t = np.asarray(y_true) > 0
    p = np.asarray(y_pred) > 0
    return int(np.sum(t & p)), int(np.sum(~t & ~p)), int(np.sum(~t & p)), int(np.sum(t & ~p))


def detection_metrics(tp: int, tn: int, fp: int, fn: int) -> dict[str, float]:
    """Accuracy, sensitivity and specificity in percent (NaN for an empty class)."""
    return {
        "accuracy": _pct(tp + tn, tp + tn + fp + fn),
        "sensitivity": _pct(tp, tp + fn),
        "specificity": _pct(tn, tn + fp),
    }


def stratified_folds(labels, k: int, seed: int = 0) -> list[np.ndarray]:
    """Split indices into ``k`` disjoint folds preserving the class ratio.

    Each class is shuffled and dealt round-robin; the dealer continues from
    one class to the next, so fold sizes differ by at most one and every
    fold holds within one sample of its share of each class.
    """
    labels = np.asarray(labels)
    classes, counts = np.unique(labels, return_counts=True)
    if counts.min(initial=k) < k:
        raise DataError(f"every class needs at least k={k} members, got counts {counts.tolist()}")
    rng = np.random.default_rng(seed)
    dealt = np.concatenate([rng.permutation(np.flatnonzero(labels == c)) for c in classes])
    slot = np.arange(len(dealt)) % k
    return [np.sort(dealt[slot == f]) for f in range(k)]


def subject_folds(subjects, labels, k: int, seed: int = 0) -> list[np.ndarray]:
    """Folds that keep every subject's samples together.

    Subjects are grouped by their (majority) class, shuffled and dealt
    round-robin so each fold receives subjects of both classes.
    """
    subjects = np.asarray(subjects)
    labels = np.asarray(labels)
    names = np.unique(subjects)
    klass = {s: int(round(labels[subjects == s].mean())) for s in names}
    rng = np.random.default_rng(seed)
    order = []
    for c in (1, 0):
        group = [s for s in names if klass[s] == c]
        if len(group) < k:
            raise DataError(f"subject-held-out CV needs >= {k} subjects per class, got {len(group)}")
        order += [group[i] for i in rng.permutation(len(group))]
    fold_of = {s: i % k for i, s in enumerate(order)}
    assign = np.array([fold_of[s] for s in subjects])
    return [np.flatnonzero(assign == f) for f in range(k)]


def make_folds(dataset: SampleSet, cv: CvConfig) -> list[np.ndarray]:
    if cv.mode == "subject-held-out":
        return subject_folds(dataset.subjects, dataset.labels, cv.k, cv.seed)
    return stratified_folds(dataset.labels, cv.k, cv.seed)


def fit_fold(
    train_set: SampleSet, features: FeatureConfig, classifier: ClassifierConfig
) -> tuple[FeatureBundle, LinearModel]:
    """Everything a fold fits, computed from its training rows alone."""
    bundle = fit_features(train_set, features)
    model = train(
        bundle.training_features(train_set),
        train_set.labels,
        C=classifier.C,
        seed=classifier.seed,
        tol=classifier.tol,
        max_iter=classifier.max_iter,
    )
    return bundle, model


def run_cv(
    dataset: SampleSet,
    features: FeatureConfig,
    classifier: ClassifierConfig | None = None,
    cv: CvConfig | None = None,
    folds: list[np.ndarray] | None = None,
    keep_artifacts: bool = False,
    config_echo: dict | None = None,
    progress: Callable[[FoldResult], None] | None = None,
) -> FoldReport:
    """Cross-validate one feature method.

    Per fold, pooled statistics, quantizer, PWMs, feature standardisation and
    the classifier are fitted on the training rows; the held-out rows are
    only ever transformed with those fitted artefacts. ``folds`` overrides
    the fold assignment derived from ``cv``.
    """
    classifier = classifier or ClassifierConfig()
    cv = cv or CvConfig()
    if folds is None:
        folds = make_folds(dataset, cv)
    n = len(dataset)
    results, bundles, models = [], [], []
    for f, test_idx in enumerate(folds):
        mask = np.ones(n, dtype=bool)
        mask[test_idx] = False
        train_set = dataset.subset(np.flatnonzero(mask))
        test_set = dataset.subset(test_idx)
        bundle, model = fit_fold(train_set, features, classifier)
        y_pred = predict(model, bundle.transform(test_set.values))
        tp, tn, fp, fn = confusion(test_set.labels, y_pred)
        res = FoldResult(f, tp, tn, fp, fn, len(train_set), len(test_set), **detection_metrics(tp, tn, fp, fn))
        results.append(res)
        if progress is not None:
            progress(res)
        if keep_artifacts:
            bundles.append(bundle)
            models.append(model)
    mean = {
        key: float(np.nanmean([getattr(r, key) for r in results]))
        for key in ("accuracy", "sensitivity", "specificity")
    }
    echo = {
        "features": features.echo(),
        "classifier": asdict(classifier),
        "cv": asdict(cv),
        "n_samples": n,
        "n_positive": int(np.sum(dataset.labels > 0)),
        "n_negative": int(np.sum(dataset.labels == 0)),
    }
    echo.update(config_echo or {})
    return FoldReport(results, mean, features.feature_size(dataset.n_features), echo, bundles, models)
