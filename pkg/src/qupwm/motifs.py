"""Motif (k-mer) position weight matrices.

Every quantized sequence is viewed through the binary occurrence track of
each k-mer ``j``: ``m_j(n) = 1`` iff the ``k`` levels starting at ``n`` spell
``j``. Per motif, the positive matrix counts training sequences in which the
motif is present at ``n``; the negative matrix counts, by default, negative
sequences in which it is *absent* at ``n`` (``negative_mode="absence"``).
``negative_mode="presence"`` gives the symmetric variant.

Occurrence tracks are never materialised: a window of ``k`` levels is
encoded as one integer (lexicographic rank of the motif) and all counting
and scoring is done with ``bincount`` over those codes.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .pwm import as_sequences

MAX_ORDER = 3
NEGATIVE_MODES = ("absence", "presence")


@dataclass(frozen=True)
class MotifSet:
    """All motifs of the given orders over levels ``1..M``, in frozen order.

    Orders ascend; motifs within an order are lexicographic by level, so
    column ``j`` of a feature matrix always denotes the same motif.
    """

    levels: int
    orders: tuple[int, ...] = (1, 2)

    def __post_init__(self) -> None:
        orders = tuple(sorted(set(int(k) for k in self.orders)))
        if not orders:
            raise ConfigError("motifs.orders", "at least one order is required")
        if orders[0] < 1 or orders[-1] > MAX_ORDER:
            raise ConfigError("motifs.orders", f"orders must lie in 1..{MAX_ORDER}")
        if self.levels < 2:
            raise ConfigError("quantizer.levels", "need at least two levels")
        object.__setattr__(self, "orders", orders)

    def motifs(self, k: int | None = None) -> list[tuple[int, ...]]:
        ks = self.orders if k is None else (k,)
        return [
            m for kk in ks for m in itertools.product(range(1, self.levels + 1), repeat=kk)
        ]

    def __len__(self) -> int:
        return sum(self.levels**k for k in self.orders)

    @property
    def n_features(self) -> int:
        return 2 * len(self)

    def feature_names(self) -> list[str]:
        names = []
        for m in self.motifs():
            tag = "_".join(str(v) for v in m)
            names += [f"pos_{tag}", f"neg_{tag}"]
        return names


def motif_code(motif, levels: int) -> int:
    """Lexicographic rank of ``motif`` among motifs of the same order."""
    code = 0
    for v in motif:
        if not 1 <= v <= levels:
            raise DataError(f"motif level {v} outside 1..{levels}")
        code = code * levels + (int(v) - 1)
    return code


def kmer_codes(seqs: np.ndarray, k: int, levels: int) -> np.ndarray:
    """``(n, N - k + 1)`` motif codes of every length-``k`` window."""
    n, N = seqs.shape
    if k < 1:
        raise ConfigError("motifs.orders", "k must be >= 1")
    if k > N:
        raise DataError(f"k={k} exceeds sequence length {N}")
    width = N - k + 1
    codes = np.zeros((n, width), dtype=np.int64)
    for t in range(k):
        codes = codes * levels + (seqs[:, t : t + width] - 1)
    return codes


def extract_kmer_binary(q, k: int, motif) -> np.ndarray:
    """Occurrence track of ``motif`` (a length-``k`` tuple of levels) in ``q``."""
    q = np.asarray(q, dtype=np.int64)
    motif = tuple(int(v) for v in motif)
    if len(motif) != k:
        raise DataError(f"motif {motif} is not of order {k}")
    if q.ndim != 1:
        raise DataError("extract_kmer_binary expects a 1-D sequence")
    if k > len(q):
        raise DataError(f"k={k} exceeds sequence length {len(q)}")
    if len(q) and q.min() < 1:
        raise DataError("levels must be >= 1")
    levels = max(int(q.max(initial=1)), max(motif))
    return (kmer_codes(q[None, :], k, levels)[0] == motif_code(motif, levels)).astype(np.int8)


def _presence_counts(seqs: np.ndarray, k: int, levels: int) -> np.ndarray:
    codes = kmer_codes(seqs, k, levels)
    n_motifs = levels**k
    width = codes.shape[1]
    flat = (codes + np.arange(width, dtype=np.int64) * n_motifs).ravel()
    return np.bincount(flat, minlength=width * n_motifs).reshape(width, n_motifs).T


@dataclass
class MotifPwmSet:
    """Per-order ``(M**k, N - k + 1)`` count matrices for both classes."""

    motifs: MotifSet
    pos_counts: dict[int, np.ndarray]
    neg_counts: dict[int, np.ndarray]
    n_pos: int
    n_neg: int
    negative_mode: str = "absence"
    length: int = field(default=0)

    def counts_for(self, motif) -> tuple[np.ndarray, np.ndarray]:
        """``(PWM_j+, PWM_j-)`` vectors for one motif tuple."""
        k = len(motif)
        j = motif_code(motif, self.motifs.levels)
        return self.pos_counts[k][j], self.neg_counts[k][j]

    def save(self, path: str | Path) -> None:
        header = {
            "M": self.motifs.levels,
            "orders": list(self.motifs.orders),
            "N": self.length,
            "n_pos": self.n_pos,
            "n_neg": self.n_neg,
            "negative_mode": self.negative_mode,
        }
        arrays = {f"pos_{k}": v for k, v in self.pos_counts.items()}
        arrays |= {f"neg_{k}": v for k, v in self.neg_counts.items()}
        with open(path, "wb") as fh:
            np.savez(fh, header=np.array(json.dumps(header, sort_keys=True)), **arrays)

    @classmethod
    def load(cls, path: str | Path) -> MotifPwmSet:
        with np.load(path) as z:
            h = json.loads(str(z["header"]))
            ms = MotifSet(h["M"], tuple(h["orders"]))
            pos = {k: z[f"pos_{k}"] for k in ms.orders}
            neg = {k: z[f"neg_{k}"] for k in ms.orders}
        return cls(ms, pos, neg, h["n_pos"], h["n_neg"], h["negative_mode"], h["N"])


def build_motif_pwms(
    train_pos, train_neg, motifs: MotifSet, negative_mode: str = "absence"
) -> MotifPwmSet:
    if negative_mode not in NEGATIVE_MODES:
        raise ConfigError("motifs.negative_mode", f"must be one of {NEGATIVE_MODES}")
    M = motifs.levels
    pos = as_sequences(train_pos, M, "positive training set")
    neg = as_sequences(train_neg, M, "negative training set")
    if pos.shape[1] != neg.shape[1]:
        raise DataError("positive and negative sequences differ in length")
    pos_counts, neg_counts = {}, {}
    for k in motifs.orders:
        pos_counts[k] = _presence_counts(pos, k, M)
        present = _presence_counts(neg, k, M)
        neg_counts[k] = len(neg) - present if negative_mode == "absence" else present
    return MotifPwmSet(motifs, pos_counts, neg_counts, len(pos), len(neg), negative_mode, pos.shape[1])


def _ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    # never-observed motifs (zero mass) score 0
    safe = np.where(den > 0, den, 1.0)
    return np.where(den > 0, np.clip(num / safe, 0.0, 1.0), 0.0)


def mpwm_features(seqs, pwms: MotifPwmSet, self_labels=None) -> np.ndarray:
    """``(n, 2 * n_motifs)`` features; columns follow ``MotifSet.feature_names``.

    For motif ``j`` the positive score is the normalised positive mass at the
    positions where ``j`` occurs; the negative score is the normalised
    negative mass at the positions where it does not.

    ``self_labels`` marks the rows as the training sequences the PWMs were
    built from; each row is then scored against its class matrices with its
    own contribution removed.
    """
    M = pwms.motifs.levels
    q = as_sequences(seqs, M)
    if q.shape[1] != pwms.length:
        raise DataError(f"sequence length {q.shape[1]} does not match PWM length {pwms.length}")
    n = len(q)
    own_pos = np.zeros((n, 1))
    own_neg = np.zeros((n, 1))
    if self_labels is not None:
        own_pos = (np.asarray(self_labels) > 0).astype(np.float64)[:, None]
        own_neg = 1.0 - own_pos
    blocks = []
    for k in pwms.motifs.orders:
        n_motifs = M**k
        codes = kmer_codes(q, k, M)
        width = codes.shape[1]
        cols = np.arange(width)
        rows = ((np.arange(n, dtype=np.int64) * n_motifs)[:, None] + codes).ravel()
        size = n * n_motifs

        def gather(counts: np.ndarray) -> np.ndarray:
            return np.bincount(rows, weights=counts[codes, cols].ravel(), minlength=size).reshape(n, n_motifs)

        occ = np.bincount(rows, minlength=size).reshape(n, n_motifs).astype(np.float64)
        pos_total = pwms.pos_counts[k].sum(axis=1).astype(np.float64)
        neg_total = pwms.neg_counts[k].sum(axis=1).astype(np.float64)
        # own contribution of a training row: its presences to the positive
        # matrix; its absences (or presences) to the negative matrix
        pos_den = pos_total - own_pos * occ
        score_pos = _ratio(gather(pwms.pos_counts[k]) - own_pos * occ, pos_den)
        if pwms.negative_mode == "absence":
            own_in_neg, own_where_absent = width - occ, width - occ
        else:
            own_in_neg, own_where_absent = occ, 0.0
        neg_den = neg_total - own_neg * own_in_neg
        neg_num = neg_total - gather(pwms.neg_counts[k]) - own_neg * own_where_absent
        score_neg = _ratio(neg_num, neg_den)
        block = np.empty((n, 2 * n_motifs))
        block[:, 0::2] = score_pos
        block[:, 1::2] = score_neg
        blocks.append(block)
    return np.hstack(blocks)


def mpwm_scores(q, pwms: MotifPwmSet) -> np.ndarray:
    """Feature vector of a single sequence."""
    q = np.asarray(q)
    if q.ndim != 1:
        raise DataError("mpwm_scores expects one 1-D sequence")
    return mpwm_features(q, pwms)[0]
