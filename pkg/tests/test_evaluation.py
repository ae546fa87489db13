import dataclasses
import math

import numpy as np
import pytest

from conftest import SMALL_SYNTH
from qupwm.errors import ConfigError, DataError
from qupwm.evaluation import (
    ClassifierConfig,
    CvConfig,
    confusion,
    detection_metrics,
    run_cv,
    stratified_folds,
    subject_folds,
)
from qupwm.features import FeatureConfig
from qupwm.quantizer import QuantizerConfig
from qupwm.signals import FrameSpec, SampleSet, SamplingPolicy, assemble_samples
from qupwm.synth import generate

MPWM = FeatureConfig("mpwm", QuantizerConfig(6, None, 0.3), orders=(1, 2))


def test_metrics_hand_case():
    assert confusion([1, 1, 0, 0, 1], [1, 0, 0, 1, 1]) == (2, 1, 1, 1)
    m = detection_metrics(2, 1, 1, 1)
    assert m == {"accuracy": 60.0, "sensitivity": pytest.approx(200 / 3), "specificity": 50.0}
    assert math.isnan(detection_metrics(0, 3, 0, 0)["sensitivity"])


def test_ten_plus_ten_in_five_folds():
    labels = np.repeat([1, 0], 10)
    for fold in stratified_folds(labels, 5, seed=3):
        assert sorted(labels[fold].tolist()) == [0, 0, 1, 1]


def test_large_folds_are_balanced_partitions():
    labels = np.repeat([1, 0], 1734)
    folds = stratified_folds(labels, 5, seed=0)
    sizes = [len(f) for f in folds]
    assert max(sizes) - min(sizes) <= 1
    assert np.array_equal(np.sort(np.concatenate(folds)), np.arange(len(labels)))
    for f in folds:
        assert abs(int(labels[f].sum()) - 1734 / 5) <= 1


def test_too_few_members():
    with pytest.raises(DataError):
        stratified_folds([1, 1, 0, 0, 0, 0, 0], 5)


def test_subject_folds_keep_subjects_together():
    subjects = np.repeat([f"s{i}" for i in range(10)], 4)
    labels = np.repeat([1] * 5 + [0] * 5, 4)
    folds = subject_folds(subjects, labels, 5, seed=1)
    for f in folds:
        for s in set(subjects[f]):
            assert set(np.flatnonzero(subjects == s)) <= set(f)
        assert set(labels[f]) == {0, 1}


def test_cv_config_validation():
    with pytest.raises(ConfigError):
        CvConfig(k=1)
    with pytest.raises(ConfigError):
        CvConfig(mode="loso")
    with pytest.raises(ConfigError):
        ClassifierConfig(C=0.0)


def test_no_leakage_from_test_folds(small_samples):
    folds = stratified_folds(small_samples.labels, 5, seed=0)
    base = run_cv(small_samples, MPWM, folds=folds, keep_artifacts=True)
    rng = np.random.default_rng(0)
    for f, test_idx in enumerate(folds):
        mutated = SampleSet(
            small_samples.values.copy(), small_samples.labels.copy(), small_samples.subjects, small_samples.starts
        )
        mutated.values[test_idx] = rng.normal(5.0, 3.0, (len(test_idx), mutated.n_features))
        mutated.labels[test_idx] = 1 - mutated.labels[test_idx]
        other = run_cv(mutated, MPWM, folds=folds, keep_artifacts=True)
        assert other.artifacts[f].fingerprint() == base.artifacts[f].fingerprint()
        assert other.artifacts[f].stats == base.artifacts[f].stats


def test_label_permutation_changes_metrics_not_pwms(small_samples):
    folds = stratified_folds(small_samples.labels, 5, seed=0)
    base = run_cv(small_samples, MPWM, folds=folds, keep_artifacts=True)
    labels = small_samples.labels.copy()
    test_idx = folds[2]
    labels[test_idx] = 1 - labels[test_idx]
    flipped = run_cv(
        SampleSet(small_samples.values, labels, small_samples.subjects, small_samples.starts),
        MPWM, folds=folds, keep_artifacts=True,
    )
    assert flipped.artifacts[2].fingerprint() == base.artifacts[2].fingerprint()
    assert flipped.per_fold[2].accuracy == pytest.approx(100 - base.per_fold[2].accuracy)


def test_random_labels_are_at_chance():
    rng = np.random.default_rng(5)
    n = 2000
    ds = SampleSet(rng.standard_normal((n, 30)), rng.permutation(np.repeat([1, 0], n // 2)),
                   np.repeat(["a", "b"], n // 2), np.arange(n))
    for method in ("raw", "pwm", "mpwm"):
        report = run_cv(ds, FeatureConfig(method, QuantizerConfig(4, None, 0.5), orders=(1, 2)))
        assert 45 <= report.mean["accuracy"] <= 55


def test_report_is_deterministic_and_complete(small_samples):
    a = run_cv(small_samples, MPWM, cv=CvConfig(k=5, seed=2))
    b = run_cv(small_samples, MPWM, cv=CvConfig(k=5, seed=2))
    assert a.to_json() == b.to_json()
    d = a.to_dict()
    assert len(d["per_fold"]) == 5 and set(d["mean"]) == {"accuracy", "sensitivity", "specificity"}
    assert d["mean"]["accuracy"] == pytest.approx(np.mean([f["accuracy"] for f in d["per_fold"]]))
    assert d["config_echo"]["features"]["orders"] == [1, 2]
    assert sum(f["n_test"] for f in d["per_fold"]) == len(small_samples)


def test_subject_held_out_mode():
    recs = generate(dataclasses.replace(SMALL_SYNTH, n_subjects=6, spikes_per_record=10))
    ds = assemble_samples(recs, FrameSpec(100, 2), SamplingPolicy(max_windows_per_spike=1))
    report = run_cv(ds, MPWM, cv=CvConfig(k=3, mode="subject-held-out"))
    assert len(report.per_fold) == 3
