import logging
import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from mtsource import serialize
from mtsource.classifier import (ClassifierError, KNNModel, LinearModel, NBModel, NumericError, TrainConfig,
                                 model_from_dict, predict_knn, primal_objective, train_classifier,
                                 train_knn, train_linear_svm, train_multinomial_nb)

from oracles import qp_binary_svm, qp_ovr_predict


def blobs(seed=0, n=50):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.uniform(-0.1, 0.1, (n, 2)), 5 + rng.uniform(-0.1, 0.1, (n, 2))])
    return X, ["a"] * n + ["b"] * n


def fixed_model(classes, coef, intercept):
    return LinearModel(tuple(classes), np.asarray(coef, float), np.asarray(intercept, float))


def test_blobs_separable():
    X, y = blobs()
    model = train_linear_svm(X, y)
    assert model.predict(X) == y
    assert model.classes == ("a", "b")
    assert model.coef.shape == (2, 2)


def test_errors():
    with pytest.raises(ClassifierError, match="two classes"):
        train_linear_svm(np.ones((3, 2)), ["a"] * 3)
    with pytest.raises(NumericError):
        train_linear_svm(np.array([[1.0, np.nan], [0, 1]]), ["a", "b"])
    with pytest.raises(ClassifierError):
        train_linear_svm(np.ones((3, 2)), ["a", "b"])
    with pytest.raises(ValueError):
        TrainConfig(C=0)
    model = fixed_model("ab", np.zeros((2, 3)), [0, 0])
    with pytest.raises(ClassifierError, match="dimension"):
        model.decision_scores(np.ones((1, 2)))


def test_decision_score_examples():
    zero = fixed_model("ab", np.zeros((2, 3)), [0, 0])
    assert np.all(zero.decision_scores(np.array([1.0, 2, 3])) == 0)
    m = fixed_model("abc", np.arange(9).reshape(3, 3), [1, -2, 3])
    assert m.decision_scores(np.zeros(3)).tolist() == [1, -2, 3]
    x = np.array([[0.5, -1.0, 2.0]])
    s1 = m.decision_scores(x) - m.intercept
    s2 = m.decision_scores(2 * x) - m.intercept
    assert np.allclose(s2, 2 * s1)


def test_predict_examples():
    m = fixed_model(["de", "en"], np.zeros((2, 1)), [1.0, 0.2])
    assert m.predict(np.zeros((1, 1))) == ["de"]
    tie = fixed_model(["de", "en"], np.zeros((2, 1)), [0.5, 0.5])
    assert tie.predict(np.zeros((1, 1))) == ["de"]
    en = fixed_model(["de", "en", "fr"], np.zeros((3, 4)), [0, 1, 0])
    assert en.predict(np.zeros((1, 4))) == ["en"]


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
def test_scale_invariance(seed, lam):
    rng = np.random.default_rng(seed)
    k, d = rng.integers(2, 6), rng.integers(1, 8)
    m = fixed_model([f"c{i}" for i in range(k)], rng.normal(size=(k, d)), rng.normal(size=k))
    X = rng.normal(size=(10, d))
    assert m.scaled(lam).predict(X) == m.predict(X)


def test_qp_oracle_toy():
    rng = np.random.default_rng(3)
    X = np.vstack([rng.normal(0, 1, (10, 2)), rng.normal(3, 1, (10, 2))])
    y = ["a"] * 10 + ["b"] * 10
    cfg = TrainConfig(C=1.0, tolerance=1e-10, max_epochs=100000)
    model = train_linear_svm(X, y, cfg)
    w, b, obj = qp_binary_svm(X, np.where(np.array(y) == "a", 1.0, -1.0), 1.0)
    assert np.allclose(model.coef[0], w, atol=1e-5)
    assert model.intercept[0] == pytest.approx(b, abs=1e-5)
    assert primal_objective(model, X, y, "a") == pytest.approx(obj, rel=1e-7)
    grid = rng.uniform(-2, 5, (200, 2))
    pred, _ = qp_ovr_predict(X, y, grid, 1.0)
    assert model.predict(grid) == pred


@pytest.mark.parametrize("solver", ["primal", "gram"])
def test_objective_monotone(solver):
    rng = np.random.default_rng(1)
    X = sp.random(60, 15, density=0.4, random_state=2, format="csr")
    y = [str(v) for v in rng.integers(0, 3, 60)]
    model = train_linear_svm(X, y, TrainConfig(C=5.0, tolerance=1e-8), track_objective=True, solver=solver)
    for cls, hist, dual in zip(model.classes, model.objective_history, model.dual_history):
        assert np.all(np.diff(hist) <= 1e-12 * np.abs(hist[:-1]))
        assert np.all(np.diff(dual) <= 1e-12 * np.maximum(1, np.abs(dual[:-1])))
        assert hist[-1] == pytest.approx(primal_objective(model, X, y, cls), rel=1e-10)
        # weak duality: primal >= -dual
        assert hist[-1] >= -dual[-1] - 1e-9


def test_solver_routes_agree():
    X = sp.random(80, 30, density=0.3, random_state=5, format="csr")
    y = [str(i % 4) for i in range(80)]
    a = train_linear_svm(X, y, TrainConfig(seed=3), solver="primal")
    b = train_linear_svm(X, y, TrainConfig(seed=3), solver="gram")
    assert a.epochs == b.epochs
    assert np.allclose(a.coef, b.coef, atol=1e-10)
    assert np.allclose(a.intercept, b.intercept, atol=1e-10)


def test_determinism_and_jobs():
    X = sp.random(100, 40, density=0.2, random_state=0, format="csr")
    y = [str(i % 5) for i in range(100)]
    a = serialize.dumps(train_linear_svm(X, y, TrainConfig(seed=1)).to_dict())
    b = serialize.dumps(train_linear_svm(X, y, TrainConfig(seed=1), jobs=4).to_dict())
    assert a == b


def test_linear_round_trip():
    X, y = blobs(1)
    m = train_linear_svm(X, y)
    again = model_from_dict(serialize.loads(serialize.dumps(m.to_dict())))
    assert np.array_equal(again.coef, m.coef)
    assert np.array_equal(again.intercept, m.intercept)
    assert again.config == m.config


def test_nb_disjoint_vocab():
    X = np.eye(3) * 4
    y = ["x", "y", "z"]
    assert train_multinomial_nb(X, y).predict(X) == y


def test_nb_likelihood_ratio():
    m = train_multinomial_nb(np.array([[1, 0], [0, 1]]), ["A", "B"], alpha=1.0)
    s = m.decision_scores(np.array([[1, 0]]))[0]
    assert m.predict(np.array([[1, 0]])) == ["A"]
    assert s[0] - s[1] == pytest.approx(math.log((2 / 3) / (1 / 3)), abs=1e-12)


def test_nb_tfidf_warns_and_negative_errors(caplog):
    with caplog.at_level(logging.WARNING):
        train_multinomial_nb(np.array([[0.5, 0.2], [0.1, 0.9]]), ["A", "B"])
    assert "non-integer" in caplog.text
    with pytest.raises(ClassifierError):
        train_multinomial_nb(np.array([[-1, 0], [0, 1]]), ["A", "B"])


def test_knn_examples():
    X = np.array([[0.0, 0], [1, 0], [10, 10]])
    y = ["a", "b", "c"]
    assert predict_knn(X, y, np.array([[0.9, 0.1]]), k=1) == ["b"]
    assert predict_knn(X, y, np.array([[10, 10]]), k=1) == ["c"]
    with pytest.raises(ClassifierError):
        predict_knn(X, y, np.zeros((1, 2)), k=4)


def test_knn_tie_breaks():
    # symmetric geometry, k = |train|: equal votes and equal distance sums -> first class
    X = np.array([[1.0, 0], [-1.0, 0]])
    assert predict_knn(X, ["b", "a"], np.zeros((1, 2)), k=2) == ["a"]
    # equal votes, smaller distance sum wins
    X = np.array([[1.0, 0], [-2.0, 0]])
    assert predict_knn(X, ["b", "a"], np.zeros((1, 2)), k=2) == ["b"]


def test_registry_and_round_trips():
    X = np.array([[2, 0, 1], [0, 3, 0], [1, 0, 2], [0, 2, 1]], dtype=float)
    y = ["p", "q", "p", "q"]
    for name, cls in (("svm", LinearModel), ("nb", NBModel), ("knn", KNNModel)):
        m = train_classifier(name, X, y, k=1) if name == "knn" else train_classifier(name, X, y)
        assert isinstance(m, cls)
        again = model_from_dict(serialize.loads(serialize.dumps(m.to_dict())))
        assert np.array_equal(again.decision_scores(X), m.decision_scores(X))
    with pytest.raises(ClassifierError, match="svm, nb, knn"):
        train_classifier("forest", X, y)
    with pytest.raises(ClassifierError):
        train_knn(X, y, k=5)
