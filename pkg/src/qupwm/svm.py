"""Linear soft-margin SVM trained by dual coordinate descent.

The model minimises::

    0.5 * (||w||^2 + b^2) + C * mean_i max(0, 1 - y_i (w . z_i + b))

over z-scored features ``z``. Using the mean rather than the sum of hinge
losses makes the optimum invariant to duplicating the training set. The
bias is handled as an extra constant feature, so it is regularised too and
the optimum is unique.

Each coordinate step minimises the dual exactly, so the dual objective is
non-increasing; training stops when the maximal projected-gradient
violation drops below ``tol``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import DataError


@numba.njit(cache=True)
def _dcd(Z, y, upper, tol, max_iter, perms):
    n, d = Z.shape
    alpha = np.zeros(n)
    w = np.zeros(d)
    qii = np.empty(n)
    for i in range(n):
        qii[i] = Z[i] @ Z[i]
    history = np.empty(max_iter)
    n_iter = 0
    converged = False
    for it in range(max_iter):
        pg_max = -np.inf
        pg_min = np.inf
        order = perms[it % perms.shape[0]]
        for t in range(n):
            i = order[t]
            g = y[i] * (w @ Z[i]) - 1.0
            a = alpha[i]
            if a == 0.0:
                pg = min(g, 0.0)
            elif a == upper:
                pg = max(g, 0.0)
            else:
                pg = g
            pg_max = max(pg_max, pg)
            pg_min = min(pg_min, pg)
            if pg != 0.0 and qii[i] > 0.0:
                a_new = min(max(a - g / qii[i], 0.0), upper)
                delta = (a_new - a) * y[i]
                if delta != 0.0:
                    w += delta * Z[i]
                    alpha[i] = a_new
        history[it] = 0.5 * (w @ w) - alpha.sum()
        n_iter = it + 1
        if pg_max - pg_min < tol:
            converged = True
            break
    return w, alpha, history[:n_iter], converged


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    C: float
    feature_mean: np.ndarray
    feature_scale: np.ndarray
    n_iter: int = 0
    converged: bool = True
    dual_history: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def n_features(self) -> int:
        return len(self.weights)

    def standardize(self, X: np.ndarray) -> np.ndarray:
        return (X - self.feature_mean) / self.feature_scale

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DataError(
                f"expected {self.n_features} features, got array of shape {X.shape}"
            )
        return self.standardize(X) @ self.weights + self.bias

    def primal_objective(self, X, y) -> float:
        s = _signs(y)
        margins = s * self.decision_function(X)
        reg = 0.5 * (self.weights @ self.weights + self.bias**2)
        return float(reg + self.C * np.maximum(0.0, 1.0 - margins).mean())


def _signs(y) -> np.ndarray:
    y = np.asarray(y)
    return np.where(y > 0, 1.0, -1.0)


def train(X, y, C: float = 1.0, seed: int = 0, tol: float = 1e-3, max_iter: int = 2000) -> LinearModel:
    """Fit a :class:`LinearModel` on rows ``X`` with binary labels ``y`` (1 / 0)."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] != len(y):
        raise DataError("X must be 2-D with one row per label")
    if not np.all(np.isfinite(X)):
        raise DataError("non-finite feature values")
    if len(np.unique(y > 0)) < 2:
        raise DataError("training data must contain both classes")
    if not C > 0:
        raise DataError("C must be positive")

    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    n = len(X)
    Z = np.empty((n, X.shape[1] + 1))
    Z[:, :-1] = (X - mean) / scale
    Z[:, -1] = 1.0

    rng = np.random.default_rng(seed)
    perms = np.stack([rng.permutation(n) for _ in range(min(max_iter, 16))])
    w, _, history, converged = _dcd(Z, _signs(y), C / n, tol, max_iter, perms)
    if not converged:
        warnings.warn(f"SVM did not converge in {max_iter} epochs", RuntimeWarning, stacklevel=2)
    return LinearModel(w[:-1].copy(), float(w[-1]), C, mean, scale, len(history), bool(converged), history)


def predict(model: LinearModel, X) -> np.ndarray:
    """Binary labels; a decision value of exactly 0 counts as positive."""
    return (model.decision_function(X) >= 0).astype(np.int8)
