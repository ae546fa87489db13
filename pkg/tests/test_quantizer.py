import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bins_oracle, population_stats, quantize_oracle
from qupwm.errors import ConfigError, DataError
from qupwm.quantizer import (
    PooledStats,
    QuantizerConfig,
    QuantizerSpec,
    pooled_stats,
    quantize,
    sample_stats,
)

levels_st = st.integers(2, 12).map(lambda h: 2 * h)
finite = st.floats(-1e3, 1e3, allow_nan=False)
resolution_st = st.floats(1e-3, 1e2, allow_nan=False)
# dyadic values keep every sum and product exact, so ties stay ties
dyadic = st.integers(-4096, 4096).map(lambda i: i / 256)


def q1(x, spec):
    return int(quantize(np.array([x]), spec)[0])


@given(levels_st, resolution_st, finite, st.lists(finite, min_size=1, max_size=30))
def test_matches_bin_scan(M, r, mu, xs):
    spec = QuantizerSpec(M, r, mu)
    got = quantize(np.array(xs), spec).tolist()
    assert got == [quantize_oracle(x, M, r, mu) for x in xs]


@given(levels_st, resolution_st, finite, finite, finite)
def test_monotone(M, r, mu, a, b):
    spec = QuantizerSpec(M, r, mu)
    lo, hi = sorted((a, b))
    assert q1(lo, spec) <= q1(hi, spec)


@given(levels_st, resolution_st, finite, finite)
def test_bins_partition(M, r, mu, x):
    bins = bins_oracle(M, r, mu)
    inside = [q for q, (lo, hi) in enumerate(bins, start=1) if lo <= x < hi]
    assert inside == [q1(x, QuantizerSpec(M, r, mu))]


@given(levels_st, st.integers(1, 512), dyadic, dyadic, st.integers(-3, 3), dyadic)
def test_shift_scale_covariance(M, r_ticks, mu, x, log2a, b):
    r = r_ticks / 256
    a = 2.0**log2a
    base = q1(x, QuantizerSpec(M, r, mu))
    assert q1(a * x + b, QuantizerSpec(M, a * r, a * mu + b)) == base


@given(levels_st, resolution_st, finite)
def test_centroid_maps_to_upper_middle_level(M, r, mu):
    assert q1(mu, QuantizerSpec(M, r, mu)) == M // 2 + 1


@given(finite, st.floats(1e-2, 1e2), st.floats(-1, 1, exclude_max=True))
def test_three_sigma_interior(mu, sigma, frac):
    spec = QuantizerSpec(8, sigma, mu)
    x = mu + 3 * sigma * frac
    assert 2 <= q1(x, spec) <= 7
    assert q1(mu - 3 * sigma - sigma * 1e-3, spec) == 1
    assert q1(mu + 3 * sigma, spec) == 8


def test_hand_examples():
    spec = QuantizerSpec(8, 0.5, 1.0)
    assert q1(1.0, spec) == 5
    assert q1(1.4999, spec) == 5
    assert q1(1.5, spec) == 6
    assert quantize(np.zeros((2, 3)), spec).shape == (2, 3)


@pytest.mark.parametrize("levels, r", [(7, 1.0), (2, 1.0), (0, 1.0), (8, 0.0), (8, -1.0)])
def test_invalid_spec(levels, r):
    with pytest.raises(ConfigError) as err:
        QuantizerSpec(levels, r)
    assert err.value.field in ("quantizer.levels", "quantizer.resolution")


def test_non_finite_input():
    with pytest.raises(DataError):
        quantize(np.array([0.0, np.nan]), QuantizerSpec(8, 1.0))


def test_pooled_stats_arithmetic():
    # two subjects with (mu, sigma) = (1, 2) and (3, 4)
    s = pooled_stats({"a": [-1.0, 3.0], "b": [-1.0, 7.0]})
    assert (s.mean, s.std) == (2.0, 3.0)
    assert s.n_subjects == 2


@given(st.dictionaries(st.text("abc", min_size=1, max_size=3),
                       st.lists(st.floats(-100, 100), min_size=2, max_size=20), min_size=1, max_size=5))
def test_pooled_stats_matches_oracle(groups):
    s = pooled_stats(groups)
    per = [population_stats(groups[k]) for k in sorted(groups)]
    assert math.isclose(s.mean, sum(m for m, _ in per) / len(per), rel_tol=1e-9, abs_tol=1e-9)
    assert math.isclose(s.std, sum(sd for _, sd in per) / len(per), rel_tol=1e-9, abs_tol=1e-9)


def test_degenerate_single_flat_subject():
    s = pooled_stats({"only": [0.0, 0.0, 0.0, 0.0]})
    assert (s.mean, s.std) == (0.0, 0.0)
    with pytest.raises(ConfigError) as err:
        QuantizerConfig(levels=8, resolution=None, resolution_sigma=1.0).resolve(s)
    assert err.value.field == "quantizer.resolution_sigma"


def test_pooled_stats_errors():
    with pytest.raises(DataError):
        pooled_stats({})
    with pytest.raises(DataError):
        pooled_stats({"a": [1.0]})


def test_sample_stats_groups_rows_by_subject():
    values = np.array([[0.0, 2.0], [4.0, 6.0], [10.0, 10.0]])
    s = sample_stats(values, np.array(["x", "x", "y"]))
    assert s.per_subject == (("x", 3.0, math.sqrt(5.0)), ("y", 10.0, 0.0))


def test_config_resolution_modes():
    stats = PooledStats(1.0, 2.0, ())
    assert QuantizerConfig(8, 0.3).resolve(stats) == QuantizerSpec(8, 0.3, 1.0)
    assert QuantizerConfig(8, None, 0.5).resolve(stats) == QuantizerSpec(8, 1.0, 1.0)
    assert QuantizerConfig(8, 0.3, centroid=-2.0).resolve() == QuantizerSpec(8, 0.3, -2.0)
    with pytest.raises(ConfigError):
        QuantizerConfig(8, 0.3, 0.5)
    with pytest.raises(ConfigError):
        QuantizerConfig(8, 0.3).resolve()
    with pytest.raises(ConfigError):
        QuantizerConfig(8, 0.3, centroid="median")


@settings(max_examples=50)
@given(levels_st, resolution_st, finite)
def test_thresholds_ascending(M, r, mu):
    t = QuantizerSpec(M, r, mu).thresholds
    assert len(t) == M - 1
    assert np.all(np.diff(t) >= 0)
