import numpy as np
import pytest

from oracles import best_linear_accuracy
from qupwm.errors import DataError
from qupwm.svm import predict, train


def blobs(rng, n=200, sep=2.0):
    y = np.repeat([1, 0], n // 2)
    centres = np.where(y[:, None] == 1, [sep / 2, sep / 2], [-sep / 2, -sep / 2])
    return centres + rng.standard_normal((n, 2)), y


def test_separable_1d_is_fit_exactly():
    X = np.array([[-3.0], [-2.0], [-1.5], [1.0], [2.5], [4.0]])
    y = np.array([0, 0, 0, 1, 1, 1])
    model = train(X, y, C=100.0)
    assert model.converged
    assert np.array_equal(predict(model, X), y)


def test_duplicated_data_gives_same_decision_function(rng):
    X, y = blobs(rng, 60)
    a = train(X, y, C=1.0, tol=1e-8, max_iter=20000)
    b = train(np.vstack([X, X]), np.concatenate([y, y]), C=1.0, tol=1e-8, max_iter=20000)
    grid = rng.uniform(-4, 4, (50, 2))
    assert np.allclose(a.decision_function(grid), b.decision_function(grid), atol=1e-5)


def test_dual_objective_non_increasing(rng):
    X, y = blobs(rng, 200, sep=1.0)
    model = train(X, y, C=5.0, tol=1e-6)
    assert np.all(np.diff(model.dual_history) <= 1e-12)


def test_close_to_best_linear_separator(rng):
    X, y = blobs(rng, 200, sep=1.5)
    model = train(X, y, C=1.0)
    acc = 100.0 * np.mean(predict(model, X) == y)
    assert acc >= best_linear_accuracy(X.tolist(), y.tolist()) - 2.0


def test_primal_matches_dual_at_optimum(rng):
    X, y = blobs(rng, 80, sep=1.0)
    model = train(X, y, C=2.0, tol=1e-9, max_iter=50000)
    # strong duality: primal = -dual at the optimum
    assert model.primal_objective(X, y) == pytest.approx(-model.dual_history[-1], rel=1e-5)


def test_random_labels_near_chance(rng):
    X = rng.standard_normal((2000, 5))
    y = rng.integers(0, 2, 2000)
    model = train(X[:1000], y[:1000])
    acc = 100.0 * np.mean(predict(model, X[1000:]) == y[1000:])
    assert 45 <= acc <= 55


def test_constant_column_is_harmless(rng):
    X, y = blobs(rng, 40)
    X = np.column_stack([X, np.full(40, 3.0)])
    model = train(X, y)
    assert np.isfinite(model.weights).all() and model.feature_scale[-1] == 1.0


def test_deterministic_per_seed(rng):
    X, y = blobs(rng, 100, sep=0.5)
    a, b = train(X, y, seed=4), train(X, y, seed=4)
    assert np.array_equal(a.weights, b.weights) and a.bias == b.bias


def test_errors(rng):
    X, y = blobs(rng, 20)
    with pytest.raises(DataError):
        train(X, np.ones(20))
    with pytest.raises(DataError):
        train(X[:5], y)
    bad = X.copy()
    bad[0, 0] = np.inf
    with pytest.raises(DataError):
        train(bad, y)
    model = train(X, y)
    with pytest.raises(DataError):
        model.decision_function(np.zeros((3, 3)))


def test_non_convergence_warns(rng):
    X, y = blobs(rng, 100, sep=0.2)
    with pytest.warns(RuntimeWarning):
        train(X, y, C=1e4, tol=1e-12, max_iter=2)
