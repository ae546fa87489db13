"""Uniform scalar quantizer with pooled per-subject statistics.

Levels are integers ``1..M`` (``M`` even). Around the centroid ``mu`` there
are ``M - 2`` interior bins of width ``r``; everything below or above them
falls into the two tail levels::

    level 1        x <  mu - (M/2 - 1) r
    level i        mu + (i - 1 - M/2) r <= x < mu + (i - M/2) r,   2 <= i <= M-1
    level M        x >= mu + (M/2 - 1) r

so ``x == mu`` maps to level ``M/2 + 1`` and, with ``r = sigma`` and
``M = 8``, the interior bins cover ``mu +/- 3 sigma``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, DataError


@dataclass(frozen=True)
class QuantizerSpec:
    levels: int
    resolution: float
    centroid: float = 0.0

    def __post_init__(self) -> None:
        if int(self.levels) != self.levels or self.levels < 4 or self.levels % 2:
            raise ConfigError("quantizer.levels", f"must be an even integer >= 4, got {self.levels}")
        if not np.isfinite(self.resolution) or self.resolution <= 0:
            raise ConfigError("quantizer.resolution", f"must be positive, got {self.resolution}")
        if not np.isfinite(self.centroid):
            raise ConfigError("quantizer.centroid", "must be finite")

    @property
    def thresholds(self) -> np.ndarray:
        """The ``M - 1`` ascending bin edges ``mu + k r``, ``k = 1 - M/2 .. M/2 - 1``."""
        half = self.levels // 2
        k = np.arange(1 - half, half, dtype=np.float64)
        return self.centroid + k * self.resolution


@dataclass(frozen=True)
class PooledStats:
    """Unweighted average of per-subject means and standard deviations."""

    mean: float
    std: float
    per_subject: tuple[tuple[str, float, float], ...]

    @property
    def n_subjects(self) -> int:
        return len(self.per_subject)


def pooled_stats(groups: Mapping[str, np.ndarray | Sequence[float]]) -> PooledStats:
    """Pool ``{subject: values}`` into a single centroid and spread.

    Each subject contributes its population mean and standard deviation
    (divisor ``n``); the pooled values are their plain averages. A flat
    subject contributes ``sigma = 0``.
    """
    if not groups:
        raise DataError("pooled_stats needs at least one subject")
    per = []
    for subject in sorted(groups):
        x = np.asarray(groups[subject], dtype=np.float64).ravel()
        if x.size < 2:
            raise DataError(f"subject {subject!r} has fewer than 2 data points")
        per.append((str(subject), float(x.mean()), float(x.std())))
    mu = float(np.mean([m for _, m, _ in per]))
    sigma = float(np.mean([s for _, _, s in per]))
    return PooledStats(mu, sigma, tuple(per))


def sample_stats(values: np.ndarray, subjects: np.ndarray) -> PooledStats:
    """Pooled statistics of sample rows grouped by their subject of origin."""
    subjects = np.asarray(subjects)
    return pooled_stats({s: values[subjects == s] for s in np.unique(subjects)})


@dataclass(frozen=True)
class QuantizerConfig:
    """Where the quantizer parameters come from.

    Exactly one of ``resolution`` (signal units) and ``resolution_sigma``
    (multiple of the pooled sigma) is used; ``centroid`` is a number or
    ``"pooled"``.
    """

    levels: int = 10
    resolution: float | None = 0.15
    resolution_sigma: float | None = None
    centroid: float | str = "pooled"

    def __post_init__(self) -> None:
        if int(self.levels) != self.levels or self.levels < 4 or self.levels % 2:
            raise ConfigError("quantizer.levels", f"must be an even integer >= 4, got {self.levels}")
        if (self.resolution is None) == (self.resolution_sigma is None):
            raise ConfigError(
                "quantizer.resolution", "set exactly one of resolution and resolution_sigma"
            )
        for name in ("resolution", "resolution_sigma"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"quantizer.{name}", f"must be positive, got {v}")
        if isinstance(self.centroid, str) and self.centroid != "pooled":
            raise ConfigError("quantizer.centroid", "must be a number or 'pooled'")

    @property
    def needs_stats(self) -> bool:
        return self.resolution_sigma is not None or self.centroid == "pooled"

    def resolve(self, stats: PooledStats | None = None) -> QuantizerSpec:
        if self.needs_stats and stats is None:
            raise ConfigError("quantizer", "pooled statistics required to resolve this config")
        if self.resolution_sigma is not None:
            r = self.resolution_sigma * stats.std
            if not r > 0:
                raise ConfigError(
                    "quantizer.resolution_sigma", "pooled sigma is zero; resolution would be 0"
                )
        else:
            r = self.resolution
        mu = stats.mean if self.centroid == "pooled" else float(self.centroid)
        return QuantizerSpec(self.levels, float(r), float(mu))


def quantize(x, spec: QuantizerSpec) -> np.ndarray:
    """Map real values onto levels ``1..M``; output has the shape of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise DataError("cannot quantize non-finite values")
    # number of edges <= x, so each bin is half-open [lo, hi)
    q = np.searchsorted(spec.thresholds, x, side="right") + 1
    return q.astype(np.int8 if spec.levels < 127 else np.int16)
