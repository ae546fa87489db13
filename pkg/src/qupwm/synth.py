"""Seeded synthetic multi-channel recordings with injected spike transients.

Background activity is Gaussian noise low-pass smoothed along time, scaled
per subject to a drawn ``(mu_n, sigma_n)``; the scaling is exact on the time
points outside the spike segments. Epileptic records additionally
carry bipolar transients (a sharp difference-of-exponentials peak followed
by a slower opposite-signed wave) starting at each spike mark on a random
subset of channels, with a random polarity per channel.

``amplitude`` sets the peak excursion to ``(amplitude - 1) * 3 * sigma_n``:
at 1.0 nothing is injected, which gives a no-signal control.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .errors import ConfigError
from .signals import EPILEPTIC, HEALTHY, MultiChannelRecord, write_record


@dataclass(frozen=True)
class SynthConfig:
    n_subjects: int = 16
    n_channels: int = 24
    n_timepoints: int = 50000
    sample_rate_hz: float = 1000.0
    spikes_per_record: int = 200
    spike_duration_mean: float = 95.0
    spike_duration_sd: float = 8.0
    amplitude: float = 2.5
    affected_fraction: float = 0.5
    mean_range: tuple[float, float] = (-0.02, 0.02)
    std_range: tuple[float, float] = (0.98, 1.02)
    smoothing: float = 3.0
    seed: int = 7

    def __post_init__(self) -> None:
        for name in ("n_subjects", "n_channels", "n_timepoints"):
            if getattr(self, name) < 1:
                raise ConfigError(f"synth.{name}", "must be positive")
        if self.n_subjects < 2 or self.n_subjects % 2:
            raise ConfigError("synth.n_subjects", "must be an even number >= 2")
        if self.spikes_per_record < 0:
            raise ConfigError("synth.spikes_per_record", "must be >= 0")
        if self.spike_duration_mean < 10 or self.spike_duration_sd < 0:
            raise ConfigError("synth.spike_duration_mean", "must be >= 10 sample-points")
        if self.amplitude < 1.0:
            raise ConfigError("synth.amplitude", "must be >= 1 (1 injects nothing)")
        if not 0 < self.affected_fraction <= 1:
            raise ConfigError("synth.affected_fraction", "must lie in (0, 1]")
        if self.std_range[0] <= 0 or self.std_range[0] > self.std_range[1]:
            raise ConfigError("synth.std_range", "must be an increasing positive range")
        if self.mean_range[0] > self.mean_range[1]:
            raise ConfigError("synth.mean_range", "must be an increasing range")
        if self.sample_rate_hz <= 0:
            raise ConfigError("synth.sample_rate_hz", "must be positive")
        slot = self.n_timepoints // max(self.spikes_per_record, 1)
        if self.spikes_per_record and slot < 2 * self.max_duration:
            raise ConfigError("synth.spikes_per_record", "too many spikes for the record length")

    @property
    def max_duration(self) -> int:
        return int(round(self.spike_duration_mean + 3 * self.spike_duration_sd))


def spike_template(duration: int) -> np.ndarray:
    """Spike-and-slow-wave transient of ``duration`` samples, unit positive peak.

    A difference of exponentials (rise 2 samples, decay ``duration / 8``)
    followed from ``duration / 5`` on by a half-sine slow wave of opposite
    sign and 0.6 relative height that returns to zero at the end.
    """
    t = np.arange(duration, dtype=np.float64)
    rise, decay = 2.0, duration / 8.0
    peak = np.exp(-t / decay) - np.exp(-t / rise)
    peak /= peak.max()
    onset = duration // 5
    wave = np.zeros(duration)
    wave[onset:] = -0.6 * np.sin(np.pi * (t[onset:] - onset) / (duration - onset))
    return peak + wave


def _noise(rng: np.random.Generator, cfg: SynthConfig) -> np.ndarray:
    x = rng.standard_normal((cfg.n_channels, cfg.n_timepoints))
    if cfg.smoothing > 0:
        x = gaussian_filter1d(x, cfg.smoothing, axis=1, mode="wrap")
    return x


def quiet_mask(cfg: SynthConfig, marks: list[int]) -> np.ndarray:
    """Time points outside every ``[mark, mark + max_duration)`` spike segment."""
    mask = np.ones(cfg.n_timepoints, dtype=bool)
    for m in marks:
        mask[m : m + cfg.max_duration] = False
    return mask


def _scale(x: np.ndarray, mu: float, sigma: float, quiet: np.ndarray) -> np.ndarray:
    # exact (mu, sigma) per channel on the spike-free time points
    ref = x[:, quiet]
    return mu + sigma * (x - ref.mean(axis=1, keepdims=True)) / ref.std(axis=1, keepdims=True)


def _spike_marks(rng: np.random.Generator, cfg: SynthConfig) -> list[int]:
    n = cfg.spikes_per_record
    if n == 0:
        return []
    slot = cfg.n_timepoints // n
    margin = cfg.max_duration
    return [int(i * slot + rng.integers(margin, slot - margin)) for i in range(n)]


def _inject(rng, cfg: SynthConfig, x: np.ndarray, marks: list[int], mu: float, sigma: float) -> None:
    n_affected = max(1, int(round(cfg.affected_fraction * cfg.n_channels)))
    height = (cfg.amplitude - 1.0) * 3.0 * sigma
    for mark in marks:
        duration = int(np.clip(round(rng.normal(cfg.spike_duration_mean, cfg.spike_duration_sd)), 10, cfg.max_duration))
        shape = spike_template(duration)
        chans = rng.choice(cfg.n_channels, size=n_affected, replace=False)
        polarity = rng.choice([-1.0, 1.0], size=n_affected)
        gain = rng.uniform(0.6, 1.0, size=n_affected)
        # the first affected channel always carries a full-height upward spike
        polarity[0], gain[0] = 1.0, 1.0
        seg = slice(mark, mark + duration)
        for c, p, g in zip(chans, polarity, gain):
            x[c, seg] += p * g * height * shape
        if height > 0:
            c0 = chans[0]
            deficit = mu + 3.0 * sigma - x[c0, seg].max()
            if deficit >= 0:
                x[c0, seg] += (deficit + 1e-3 * sigma) * shape.clip(0, None)


def generate(config: SynthConfig | None = None) -> list[MultiChannelRecord]:
    """Records ``sub01 .. subNN``; the first half healthy, the second epileptic."""
    cfg = config or SynthConfig()
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.n_subjects)
    records = []
    for i, child in enumerate(children):
        rng = np.random.default_rng(child)
        mu = rng.uniform(*cfg.mean_range)
        sigma = rng.uniform(*cfg.std_range)
        x = _noise(rng, cfg)
        epileptic = i >= cfg.n_subjects // 2
        marks = _spike_marks(rng, cfg) if epileptic else []
        x = _scale(x, mu, sigma, quiet_mask(cfg, marks))
        if epileptic:
            _inject(rng, cfg, x, marks, mu, sigma)
        records.append(
            MultiChannelRecord(
                subject_id=f"sub{i + 1:02d}",
                channels=x,
                sample_rate_hz=cfg.sample_rate_hz,
                spike_marks=marks,
                class_hint=EPILEPTIC if epileptic else HEALTHY,
                channel_names=[f"ch{c:02d}" for c in range(cfg.n_channels)],
            )
        )
    return records


def subject_parameters(config: SynthConfig | None = None) -> list[tuple[float, float]]:
    """The ``(mu_n, sigma_n)`` drawn for each subject, in record order."""
    cfg = config or SynthConfig()
    out = []
    for child in np.random.SeedSequence(cfg.seed).spawn(cfg.n_subjects):
        rng = np.random.default_rng(child)
        out.append((rng.uniform(*cfg.mean_range), rng.uniform(*cfg.std_range)))
    return out


def write_dataset(records: list[MultiChannelRecord], directory: str | Path) -> list[Path]:
    directory = Path(directory)
    return [write_record(r, directory / f"{r.subject_id}.csv") for r in records]
