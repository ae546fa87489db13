import dataclasses

import numpy as np
import pytest

from qupwm.errors import ConfigError, DataError
from qupwm.features import FeatureBundle, FeatureConfig, fit_features
from qupwm.quantizer import QuantizerConfig

MPWM = FeatureConfig("mpwm", QuantizerConfig(6, None, 0.3), orders=(1, 2))
PWM = FeatureConfig("pwm", QuantizerConfig(8, None, 0.18))


@pytest.mark.parametrize("config, size", [(MPWM, 2 * (6 + 36)), (PWM, 2), (FeatureConfig("raw"), None)])
def test_sizes_and_names(small_samples, config, size):
    bundle = fit_features(small_samples, config)
    X = bundle.transform(small_samples.values)
    expected = size or small_samples.n_features
    assert X.shape == (len(small_samples), expected) == (len(small_samples), bundle.n_features)
    assert len(bundle.feature_names()) == expected


def test_fitted_on_training_rows_only(small_samples):
    bundle = fit_features(small_samples.subset(np.arange(0, len(small_samples), 2)), MPWM)
    assert bundle.motif_pwms.n_pos + bundle.motif_pwms.n_neg == (len(small_samples) + 1) // 2
    assert bundle.stats.n_subjects == len(set(small_samples.subjects))


def test_training_scoring_modes(small_samples):
    loo = fit_features(small_samples, MPWM)
    plain = fit_features(small_samples, dataclasses.replace(MPWM, train_scoring="plain"))
    assert np.array_equal(plain.training_features(small_samples), plain.transform(small_samples.values))
    assert not np.array_equal(loo.training_features(small_samples), loo.transform(small_samples.values))
    with pytest.raises(DataError):
        loo.training_features(small_samples.subset(np.arange(10)))


def test_bundle_roundtrip(tmp_path, small_samples):
    for config in (MPWM, PWM):
        bundle = fit_features(small_samples, config)
        back = FeatureBundle.load(bundle.save(tmp_path / config.method))
        assert back.fingerprint() == bundle.fingerprint()
        assert np.array_equal(back.transform(small_samples.values), bundle.transform(small_samples.values))
    with pytest.raises(DataError):
        FeatureBundle.load(tmp_path / "missing")


def test_transform_shape_check(small_samples):
    bundle = fit_features(small_samples, PWM)
    with pytest.raises(DataError):
        bundle.transform(np.zeros((2, 3)))


@pytest.mark.parametrize(
    "kwargs, field",
    [
        ({"method": "lstm"}, "method"),
        ({"orders": ()}, "motifs.orders"),
        ({"negative_mode": "both"}, "motifs.negative_mode"),
        ({"pseudocount": -1.0}, "pwm.pseudocount"),
        ({"train_scoring": "oob"}, "pwm.train_scoring"),
    ],
)
def test_config_validation(kwargs, field):
    with pytest.raises(ConfigError) as err:
        FeatureConfig(**kwargs)
    assert err.value.field == field
