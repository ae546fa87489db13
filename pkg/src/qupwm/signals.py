"""Multi-channel records, sliding-window framing and labeled sample assembly.

A record is one subject session stored as ``(n_channels, n_timepoints)``.
A classification sample is one window of length ``L`` taken at the same
start index on every channel, with the channel frames concatenated in
channel order (channel 1 frame, then channel 2 frame, ...).

On disk a record is a CSV file (row = time point, column = channel, an
optional ``#`` comment line) next to a JSON manifest with the same stem::

    {"subject_id": "s01", "sample_rate_hz": 1000, "class_hint": "epileptic",
     "spike_marks": [1200, 5310]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigError, DataError

HEALTHY = "healthy"
EPILEPTIC = "epileptic"
POSITIVE = 1
NEGATIVE = 0


@dataclass(frozen=True)
class FrameSpec:
    """Sliding-window geometry in sample-points."""

    frame_len: int = 100
    step: int = 2

    def __post_init__(self) -> None:
        if int(self.frame_len) != self.frame_len or self.frame_len < 1:
            raise ConfigError("frame.frame_len", "must be a positive integer")
        if int(self.step) != self.step or self.step < 1:
            raise ConfigError("frame.step", "must be a positive integer")
        if self.step > self.frame_len:
            raise ConfigError("frame.step", "must not exceed frame_len")


@dataclass
class MultiChannelRecord:
    """One subject session.

    Attributes:
        subject_id: Opaque subject identifier.
        channels: Array of shape ``(n_channels, n_timepoints)``.
        sample_rate_hz: Sampling frequency.
        spike_marks: Sorted onset indices of annotated spikes.
        class_hint: ``"healthy"`` or ``"epileptic"``.
        channel_names: Optional sensor names, one per channel.
    """

    subject_id: str
    channels: np.ndarray
    sample_rate_hz: float
    spike_marks: list[int] = field(default_factory=list)
    class_hint: str = HEALTHY
    channel_names: list[str] | None = None

    def __post_init__(self) -> None:
        self.channels = np.asarray(self.channels, dtype=np.float64)
        if self.channels.ndim != 2:
            raise DataError(
                f"record {self.subject_id!r}: channels must be 2-D, got shape {self.channels.shape}"
            )
        if not np.all(np.isfinite(self.channels)):
            raise DataError(f"record {self.subject_id!r}: non-finite signal values")
        if self.sample_rate_hz <= 0:
            raise DataError(f"record {self.subject_id!r}: sample_rate_hz must be positive")
        if self.class_hint not in (HEALTHY, EPILEPTIC):
            raise DataError(
                f"record {self.subject_id!r}: class_hint must be 'healthy' or 'epileptic'"
            )
        marks = [int(m) for m in self.spike_marks]
        if any(b <= a for a, b in zip(marks, marks[1:])):
            raise DataError(f"record {self.subject_id!r}: spike_marks must be strictly increasing")
        if marks and (marks[0] < 0 or marks[-1] >= self.n_timepoints):
            raise DataError(f"record {self.subject_id!r}: spike mark outside [0, T-1]")
        # An epileptic record may legitimately carry zero marks; a healthy one never carries any.
        if marks and self.class_hint == HEALTHY:
            raise DataError(f"record {self.subject_id!r}: healthy record with spike marks")
        self.spike_marks = marks
        if self.channel_names is not None and len(self.channel_names) != self.n_channels:
            raise DataError(f"record {self.subject_id!r}: channel_names length mismatch")

    @property
    def n_channels(self) -> int:
        return self.channels.shape[0]

    @property
    def n_timepoints(self) -> int:
        return self.channels.shape[1]

    def frame(self, start: int, frame_len: int) -> np.ndarray:
        """Concatenated channel frames starting at ``start``."""
        return self.channels[:, start : start + frame_len].reshape(-1)


@dataclass(frozen=True)
class LabeledSample:
    values: np.ndarray
    label: int
    subject_id: str
    start: int


@dataclass
class SampleSet:
    """Column-stacked labeled samples.

    Behaves as a read-only sequence of :class:`LabeledSample` while keeping
    the values in one ``(n_samples, L * C)`` matrix for vectorised stages.
    """

    values: np.ndarray
    labels: np.ndarray
    subjects: np.ndarray
    starts: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int8)
        self.subjects = np.asarray(self.subjects, dtype=str)
        self.starts = np.asarray(self.starts, dtype=np.int64)
        n = len(self.labels)
        if self.values.ndim != 2 or self.values.shape[0] != n:
            raise DataError("sample values must be a 2-D array with one row per label")
        if len(self.subjects) != n or len(self.starts) != n:
            raise DataError("sample origin arrays must match the number of labels")

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, i: int) -> LabeledSample:
        return LabeledSample(
            self.values[i], int(self.labels[i]), str(self.subjects[i]), int(self.starts[i])
        )

    def __iter__(self) -> Iterator[LabeledSample]:
        for i in range(len(self)):
            yield self[i]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def subset(self, idx) -> SampleSet:
        idx = np.asarray(idx)
        return SampleSet(self.values[idx], self.labels[idx], self.subjects[idx], self.starts[idx])

    @classmethod
    def from_samples(cls, samples: Sequence[LabeledSample]) -> SampleSet:
        if not samples:
            raise DataError("no samples")
        return cls(
            np.stack([s.values for s in samples]),
            [s.label for s in samples],
            [s.subject_id for s in samples],
            [s.start for s in samples],
        )


@dataclass(frozen=True)
class SamplingPolicy:
    """How positive and negative windows are drawn.

    Attributes:
        max_windows_per_spike: Cap on windows kept per spike mark. ``None``
            keeps every window containing the mark; otherwise the windows
            whose centre lies closest to the mark are kept.
        n_negatives: Number of healthy windows; ``None`` matches the
            number of positives.
        seed: Seed for the negative draw.
    """

    max_windows_per_spike: int | None = None
    n_negatives: int | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.max_windows_per_spike is not None and self.max_windows_per_spike < 1:
            raise ConfigError("sampling.max_windows_per_spike", "must be >= 1 or null")
        if self.n_negatives is not None and self.n_negatives < 0:
            raise ConfigError("sampling.n_negatives", "must be >= 0 or null")


def n_windows(n_timepoints: int, spec: FrameSpec) -> int:
    return (n_timepoints - spec.frame_len) // spec.step + 1


def frame_record(record: MultiChannelRecord, spec: FrameSpec) -> np.ndarray:
    """Start indices of every full window of ``spec`` over ``record``."""
    if record.n_timepoints < spec.frame_len:
        raise DataError(
            f"record too short: {record.subject_id!r} has {record.n_timepoints} "
            f"sample-points, frame_len is {spec.frame_len}"
        )
    return np.arange(n_windows(record.n_timepoints, spec), dtype=np.int64) * spec.step


def positive_starts(
    record: MultiChannelRecord, spec: FrameSpec, max_windows_per_spike: int | None = None
) -> np.ndarray:
    """Window starts whose extent contains at least one spike mark."""
    starts = frame_record(record, spec)
    L = spec.frame_len
    keep: set[int] = set()
    for mark in record.spike_marks:
        lo = np.searchsorted(starts, mark - L + 1, side="left")
        hi = np.searchsorted(starts, mark, side="right")
        cand = starts[lo:hi]
        if max_windows_per_spike is not None and len(cand) > max_windows_per_spike:
            # distance between the mark and the window centre, ties broken by start
            dist = np.abs(2 * (mark - cand) - (L - 1))
            order = np.lexsort((cand, dist))
            cand = cand[order[:max_windows_per_spike]]
        keep.update(int(s) for s in cand)
    return np.array(sorted(keep), dtype=np.int64)


def assemble_samples(
    records: MultiChannelRecord | Sequence[MultiChannelRecord],
    spec: FrameSpec,
    policy: SamplingPolicy | None = None,
) -> SampleSet:
    """Build the labeled dataset from one or more records.

    Positives are the windows of epileptic records containing a spike mark.
    Negatives are drawn uniformly without replacement from the pooled window
    starts of all healthy records. Positives come first, then negatives,
    each ordered by (record, start).
    """
    if isinstance(records, MultiChannelRecord):
        records = [records]
    policy = policy or SamplingPolicy()
    if not records:
        raise DataError("no records")
    widths = {r.n_channels for r in records}
    if len(widths) != 1:
        raise DataError(f"records disagree on channel count: {sorted(widths)}")

    L = spec.frame_len
    rows, labels, subjects, starts = [], [], [], []

    def take(rec: MultiChannelRecord, s: np.ndarray, label: int) -> None:
        for start in s:
            rows.append(rec.frame(int(start), L))
        labels.extend([label] * len(s))
        subjects.extend([rec.subject_id] * len(s))
        starts.extend(int(x) for x in s)

    for rec in records:
        if rec.class_hint == EPILEPTIC:
            take(rec, positive_starts(rec, spec, policy.max_windows_per_spike), POSITIVE)
        else:
            frame_record(rec, spec)
    n_pos = len(labels)

    healthy = [r for r in records if r.class_hint == HEALTHY]
    per_record = [n_windows(r.n_timepoints, spec) if r.n_timepoints >= L else 0 for r in healthy]
    total = int(sum(per_record))
    n_neg = n_pos if policy.n_negatives is None else policy.n_negatives
    if n_neg > total:
        raise DataError(f"requested {n_neg} negative windows but healthy records hold {total}")
    if n_neg:
        rng = np.random.default_rng(policy.seed)
        flat = np.sort(rng.choice(total, size=n_neg, replace=False))
        offsets = np.cumsum([0] + per_record)
        owner = np.searchsorted(offsets, flat, side="right") - 1
        for k, rec in enumerate(healthy):
            local = flat[owner == k] - offsets[k]
            take(rec, local * spec.step, NEGATIVE)

    if not rows:
        raise DataError("no samples could be assembled from the given records")
    return SampleSet(np.stack(rows), labels, subjects, starts)


# --- file IO -----------------------------------------------------------------


def read_record(csv_path: str | Path) -> MultiChannelRecord:
    """Load ``<stem>.csv`` and its ``<stem>.json`` manifest."""
    csv_path = Path(csv_path)
    manifest_path = csv_path.with_suffix(".json")
    if not csv_path.is_file():
        raise DataError(f"missing record file: {csv_path}")
    if not manifest_path.is_file():
        raise DataError(f"missing manifest for {csv_path.name}: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise DataError(f"invalid JSON in {manifest_path}: {exc}") from None
    for key in ("subject_id", "sample_rate_hz", "class_hint", "spike_marks"):
        if key not in manifest:
            raise DataError(f"{manifest_path}: missing field {key!r}")
    try:
        data = np.loadtxt(csv_path, delimiter=",", comments="#", ndmin=2)
    except ValueError as exc:
        raise DataError(f"unreadable CSV {csv_path}: {exc}") from None
    return MultiChannelRecord(
        subject_id=str(manifest["subject_id"]),
        channels=data.T,
        sample_rate_hz=float(manifest["sample_rate_hz"]),
        spike_marks=list(manifest["spike_marks"]),
        class_hint=manifest["class_hint"],
        channel_names=manifest.get("channels"),
    )


def write_record(record: MultiChannelRecord, csv_path: str | Path, fmt: str = "%.6f") -> Path:
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    names = record.channel_names or [f"ch{i:02d}" for i in range(record.n_channels)]
    np.savetxt(csv_path, record.channels.T, fmt=fmt, delimiter=",", header=",".join(names))
    manifest = {
        "subject_id": record.subject_id,
        "sample_rate_hz": record.sample_rate_hz,
        "class_hint": record.class_hint,
        "spike_marks": list(record.spike_marks),
        "channels": names,
    }
    csv_path.with_suffix(".json").write_text(json.dumps(manifest, indent=2) + "\n")
    return csv_path


def dataset_files(path: str | Path) -> list[Path]:
    """Record CSVs under ``path`` (a directory or a single CSV), sorted by name."""
    path = Path(path)
    if path.is_file():
        return [path]
    if not path.is_dir():
        raise DataError(f"dataset path does not exist: {path}")
    files = sorted(p for p in path.glob("*.csv") if p.with_suffix(".json").is_file())
    if not files:
        raise DataError(f"no record CSV/JSON pairs found in {path}")
    return files


def load_dataset(paths: str | Path | Sequence[str | Path]) -> list[MultiChannelRecord]:
    if isinstance(paths, (str, Path)):
        paths = [paths]
    return [read_record(f) for p in paths for f in dataset_files(p)]
