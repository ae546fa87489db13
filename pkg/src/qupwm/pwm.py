"""Class-conditional position weight matrices over quantized sequences.

``positive[n, q-1]`` counts the positive training sequences holding level
``q`` at position ``n`` (likewise for ``negative``). Counts stay integer;
normalisation happens at scoring time, where each position contributes the
empirical probability of the level observed there.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError


def as_sequences(seqs, levels: int | None = None, name: str = "sequences") -> np.ndarray:
    """Stack quantized sequences into an ``(n, N)`` integer array, validating them."""
    if isinstance(seqs, np.ndarray):
        arr = seqs
        if arr.ndim == 1:
            arr = arr[None, :]
    else:
        seqs = [np.asarray(s) for s in seqs]
        if not seqs:
            raise DataError(f"{name}: empty class")
        if len({s.shape for s in seqs}) != 1:
            raise DataError(f"{name}: mixed sequence lengths")
        arr = np.stack(seqs)
    if arr.ndim != 2:
        raise DataError(f"{name}: expected a list of 1-D sequences")
    if arr.shape[0] == 0:
        raise DataError(f"{name}: empty class")
    arr = arr.astype(np.int64, copy=False)
    if arr.size and (arr.min() < 1 or (levels is not None and arr.max() > levels)):
        raise DataError(f"{name}: levels must lie in 1..{levels}")
    return arr


def position_counts(seqs: np.ndarray, levels: int) -> np.ndarray:
    """``(N, M)`` table of how often each level occurs at each position."""
    n, N = seqs.shape
    flat = (np.arange(N, dtype=np.int64) * levels + (seqs - 1)).ravel()
    return np.bincount(flat, minlength=N * levels).reshape(N, levels)


@dataclass
class PwmPair:
    positive: np.ndarray
    negative: np.ndarray
    n_pos: int
    n_neg: int

    @property
    def length(self) -> int:
        return self.positive.shape[0]

    @property
    def levels(self) -> int:
        return self.positive.shape[1]

    def header(self) -> dict:
        return {"N": self.length, "M": self.levels, "n_pos": self.n_pos, "n_neg": self.n_neg}

    def save(self, path: str | Path) -> None:
        """Write a ``.npz`` file holding both matrices plus a JSON header."""
        with open(path, "wb") as fh:
            np.savez(
                fh,
                header=np.array(json.dumps(self.header(), sort_keys=True)),
                positive=self.positive,
                negative=self.negative,
            )

    @classmethod
    def load(cls, path: str | Path) -> PwmPair:
        with np.load(path) as z:
            header = json.loads(str(z["header"]))
            pwm = cls(z["positive"], z["negative"], header["n_pos"], header["n_neg"])
        if pwm.positive.shape != (header["N"], header["M"]):
            raise DataError(f"{path}: matrix shape disagrees with header")
        return pwm


def build_pwm_pair(train_pos, train_neg, levels: int) -> PwmPair:
    pos = as_sequences(train_pos, levels, "positive training set")
    neg = as_sequences(train_neg, levels, "negative training set")
    if pos.shape[1] != neg.shape[1]:
        raise DataError("positive and negative sequences differ in length")
    return PwmPair(position_counts(pos, levels), position_counts(neg, levels), len(pos), len(neg))


def _class_score(counts, n_class, cols, own, pseudocount) -> np.ndarray:
    levels = counts.shape[1]
    hits = counts[np.arange(counts.shape[0]), cols] - own[:, None]
    denom = (n_class - own) + pseudocount * levels
    safe = np.where(denom > 0, denom, 1.0)
    return np.where(denom > 0, (hits + pseudocount).sum(axis=1) / safe, 0.0)


def pwm_features(seqs, pwm: PwmPair, pseudocount: float = 0.0, self_labels=None) -> np.ndarray:
    """``(n, 2)`` array of (positive score, negative score) per sequence.

    Each score sums, over positions, the class probability of the level seen
    at that position, so it lies in ``[0, N]``. ``pseudocount`` > 0 applies
    additive (Laplace) smoothing; the default uses raw frequencies.

    ``self_labels`` marks the rows as the training sequences the PWMs were
    built from (1 positive, 0 negative): each row is then scored with its
    own contribution removed from its class matrix.
    """
    q = as_sequences(seqs, pwm.levels)
    if q.shape[1] != pwm.length:
        raise DataError(f"sequence length {q.shape[1]} does not match PWM length {pwm.length}")
    own_pos = np.zeros(len(q))
    own_neg = np.zeros(len(q))
    if self_labels is not None:
        self_labels = np.asarray(self_labels)
        own_pos = (self_labels > 0).astype(np.float64)
        own_neg = 1.0 - own_pos
    cols = q - 1
    return np.column_stack(
        [
            _class_score(pwm.positive, pwm.n_pos, cols, own_pos, pseudocount),
            _class_score(pwm.negative, pwm.n_neg, cols, own_neg, pseudocount),
        ]
    )


def pwm_scores(q, pwm: PwmPair, pseudocount: float = 0.0) -> tuple[float, float]:
    """Scores of a single sequence: ``(score_pos, score_neg)``."""
    q = np.asarray(q)
    if q.ndim != 1:
        raise DataError("pwm_scores expects one 1-D sequence")
    s = pwm_features(q, pwm, pseudocount)[0]
    return float(s[0]), float(s[1])
