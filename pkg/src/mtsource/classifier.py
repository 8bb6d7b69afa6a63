"""Linear SVM (one-vs-rest, dual coordinate descent) plus Naive Bayes and k-NN baselines.

All models expose ``classes`` (sorted), ``decision_scores(X)`` and
``predict(X)``; argmax ties resolve to the lexicographically first class.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import _solver
from .rng import derive_seed

log = logging.getLogger(__name__)

CLASSIFIERS = ("svm", "nb", "knn")


class ClassifierError(ValueError):
    pass


class NumericError(ClassifierError):
    pass


def _as_csr(X) -> sp.csr_matrix:
    X = sp.csr_matrix(X, dtype=np.float64)
    X.sort_indices()
    if X.data.size and not np.all(np.isfinite(X.data)):
        raise NumericError("feature matrix contains non-finite values")
    return X


def _classes(y: Sequence[str]) -> tuple[list[str], np.ndarray]:
    classes = sorted(set(y))
    index = {c: i for i, c in enumerate(classes)}
    return classes, np.array([index[v] for v in y], dtype=np.int64)


def _argmax(scores: np.ndarray) -> np.ndarray:
    # np.argmax returns the first maximum, i.e. the lexicographically first class
    return np.argmax(scores, axis=1)


@dataclass(frozen=True)
class TrainConfig:
    C: float = 1.0
    tolerance: float = 1e-4
    max_epochs: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not (self.C > 0 and math.isfinite(self.C)):
            raise ClassifierError("C must be a positive finite number")
        if not self.tolerance > 0:
            raise ClassifierError("tolerance must be positive")
        if self.max_epochs < 1:
            raise ClassifierError("max_epochs must be >= 1")

    def to_dict(self) -> dict:
        return {"C": self.C, "tolerance": self.tolerance, "max_epochs": self.max_epochs, "seed": self.seed}


@dataclass(eq=False)
class LinearModel:
    classes: tuple[str, ...]
    coef: np.ndarray          # (n_classes, n_features)
    intercept: np.ndarray     # (n_classes,)
    config: TrainConfig = field(default_factory=TrainConfig)
    epochs: tuple[int, ...] = ()
    # per class, per epoch: primal objective of the kept iterate, dual objective of the current one
    objective_history: list[np.ndarray] = field(default_factory=list, repr=False)
    dual_history: list[np.ndarray] = field(default_factory=list, repr=False)

    kind = "svm"

    @property
    def n_features(self) -> int:
        return self.coef.shape[1]

    def decision_scores(self, X) -> np.ndarray:
        return decision_scores(self, X)

    def predict(self, X) -> list[str]:
        return predict(self, X)

    def scaled(self, factor: float) -> "LinearModel":
        return LinearModel(self.classes, self.coef * factor, self.intercept * factor, self.config)

    def to_dict(self) -> dict:
        rows = []
        for w in self.coef:
            nz = np.flatnonzero(w)
            rows.append({"indices": nz.tolist(), "values": w[nz].tolist()})
        return {
            "kind": self.kind,
            "classes": list(self.classes),
            "n_features": int(self.n_features),
            "weights": rows,
            "intercept": self.intercept.tolist(),
            "config": self.config.to_dict(),
            "epochs": list(self.epochs),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LinearModel":
        n = int(data["n_features"])
        coef = np.zeros((len(data["classes"]), n))
        for k, row in enumerate(data["weights"]):
            coef[k, np.asarray(row["indices"], dtype=np.int64)] = np.asarray(row["values"], dtype=np.float64)
        return cls(tuple(data["classes"]), coef, np.asarray(data["intercept"], dtype=np.float64),
                   TrainConfig(**data["config"]), tuple(data.get("epochs", ())))


def _use_gram(X: sp.csr_matrix, solver: str) -> bool:
    if solver not in ("auto", "primal", "gram"):
        raise ClassifierError(f"unknown solver {solver!r}")
    if solver != "auto":
        return solver == "gram"
    n = X.shape[0]
    return n <= GRAM_MAX_SAMPLES and n * n < X.nnz


# cached Gram matrices above this size cost too much memory
GRAM_MAX_SAMPLES = 6000


def _fit_binary(X: sp.csr_matrix, K: np.ndarray | None, target: np.ndarray, config: TrainConfig,
                seed: int, track_objective: bool):
    n, d = X.shape
    alpha = np.zeros(n)
    history = np.zeros(config.max_epochs if track_objective else 0)
    dual = np.zeros_like(history)
    state = _solver.state_array(seed)
    if K is None:
        w = np.zeros(d + 1)
        epochs, viol = _solver.dual_cd(
            X.indptr.astype(np.int64), X.indices.astype(np.int64), X.data, target,
            float(config.C), float(config.tolerance), int(config.max_epochs), state, w, alpha, history, dual,
        )
    else:
        epochs, viol = _solver.dual_cd_gram(
            K, target, float(config.C), float(config.tolerance), int(config.max_epochs), state, alpha, history, dual,
        )
        coef = alpha * target
        w = np.append(np.asarray(X.T @ coef).ravel(), coef.sum())
    if viol >= config.tolerance:
        log.debug("dual CD stopped at max_epochs=%d with violation %.3g", config.max_epochs, viol)
    return w, epochs, history[:epochs], dual[:epochs]


def train_linear_svm(X, y: Sequence[str], config: TrainConfig | None = None, jobs: int = 1,
                     track_objective: bool = False, solver: str = "auto") -> LinearModel:
    """One-vs-rest L2-regularized hinge-loss SVM.

    Each class-vs-rest problem is solved by dual coordinate descent with the
    intercept treated as an extra (regularized) feature fixed at 1.  The
    coordinate order is reshuffled every epoch from a seed derived from
    ``config.seed`` and the class label; training stops once the largest
    projected-gradient violation of an epoch is below ``config.tolerance``.
    The returned weights are the end-of-epoch iterate with the lowest primal
    objective, so ``objective_history`` (with ``track_objective``) is
    non-increasing; ``dual_history`` tracks the raw iterate's dual objective.

    ``solver="auto"`` runs the updates on a cached Gram matrix when there
    are fewer samples than stored nonzeros per sample; ``"primal"`` and
    ``"gram"`` force one route.  Both routes perform the same iteration.
    """
    config = config or TrainConfig()
    X = _as_csr(X)
    y = list(y)
    if X.shape[0] != len(y):
        raise ClassifierError(f"{X.shape[0]} rows but {len(y)} labels")
    classes, yi = _classes(y)
    if len(classes) < 2:
        raise ClassifierError("training data must contain at least two classes")

    K = None
    if _use_gram(X, solver):
        K = np.asarray((X @ X.T).todense()) + 1.0

    def fit(k):
        target = np.where(yi == k, 1.0, -1.0)
        return _fit_binary(X, K, target, config, derive_seed(config.seed, "svm", classes[k]), track_objective)

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(fit, range(len(classes))))
    coef = np.vstack([r[0][:-1] for r in results])
    intercept = np.array([r[0][-1] for r in results])
    return LinearModel(tuple(classes), coef, intercept, config,
                       tuple(int(r[1]) for r in results),
                       [r[2] for r in results] if track_objective else [],
                       [r[3] for r in results] if track_objective else [])


def decision_scores(model: LinearModel, X) -> np.ndarray:
    """``X @ coef.T + intercept``; one row per sample, columns in class order."""
    single = not sp.issparse(X) and np.ndim(X) == 1
    X = _as_csr(np.atleast_2d(X) if single else X)
    if X.shape[1] != model.n_features:
        raise ClassifierError(f"feature dimension {X.shape[1]} does not match model ({model.n_features})")
    scores = np.asarray(X @ model.coef.T) + model.intercept
    return scores[0] if single else scores


def predict(model, X) -> list[str]:
    scores = model.decision_scores(X)
    scores = np.atleast_2d(scores)
    return [model.classes[i] for i in _argmax(scores)]


def primal_objective(model: LinearModel, X, y: Sequence[str], cls: str) -> float:
    """Binary primal objective of one class-vs-rest subproblem."""
    k = model.classes.index(cls)
    X = _as_csr(X)
    target = np.where(np.asarray(y) == cls, 1.0, -1.0)
    margins = 1.0 - target * (X @ model.coef[k] + model.intercept[k])
    reg = model.coef[k] @ model.coef[k] + model.intercept[k] ** 2
    return 0.5 * reg + model.config.C * np.maximum(margins, 0.0).sum()


# ---------------------------------------------------------------------------
# multinomial Naive Bayes
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class NBModel:
    classes: tuple[str, ...]
    class_log_prior: np.ndarray
    feature_log_prob: np.ndarray  # (n_classes, n_features)
    alpha: float = 1.0

    kind = "nb"

    @property
    def n_features(self) -> int:
        return self.feature_log_prob.shape[1]

    def decision_scores(self, X) -> np.ndarray:
        """Joint log-likelihood per class (unnormalized log posterior)."""
        X = _as_csr(X)
        if X.shape[1] != self.n_features:
            raise ClassifierError(f"feature dimension {X.shape[1]} does not match model ({self.n_features})")
        return np.asarray(X @ self.feature_log_prob.T) + self.class_log_prior

    def predict(self, X) -> list[str]:
        return predict(self, X)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "classes": list(self.classes),
            "alpha": self.alpha,
            "class_log_prior": self.class_log_prior.tolist(),
            "feature_log_prob": [row.tolist() for row in self.feature_log_prob],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NBModel":
        return cls(tuple(data["classes"]), np.asarray(data["class_log_prior"], dtype=np.float64),
                   np.asarray(data["feature_log_prob"], dtype=np.float64).reshape(len(data["classes"]), -1),
                   float(data["alpha"]))


def train_multinomial_nb(X, y: Sequence[str], alpha: float = 1.0) -> NBModel:
    """Class priors from label frequencies; term likelihoods with additive smoothing."""
    X = _as_csr(X)
    if X.data.size and X.data.min() < 0:
        raise ClassifierError("multinomial Naive Bayes needs non-negative features")
    if X.data.size and not np.all(X.data == np.round(X.data)):
        log.warning("multinomial Naive Bayes fitted on non-integer (e.g. tf-idf) features")
    classes, yi = _classes(list(y))
    if X.shape[0] != len(yi):
        raise ClassifierError(f"{X.shape[0]} rows but {len(yi)} labels")
    onehot = sp.csr_matrix((np.ones(len(yi)), (yi, np.arange(len(yi)))), shape=(len(classes), len(yi)))
    counts = np.asarray((onehot @ X).todense()) + alpha
    feature_log_prob = np.log(counts) - np.log(counts.sum(axis=1, keepdims=True))
    class_count = np.bincount(yi, minlength=len(classes)).astype(np.float64)
    prior = np.log(class_count) - np.log(class_count.sum())
    return NBModel(tuple(classes), prior, feature_log_prob, alpha)


# ---------------------------------------------------------------------------
# k nearest neighbours
# ---------------------------------------------------------------------------


def _sq_distances(A: sp.csr_matrix, B: sp.csr_matrix) -> np.ndarray:
    a2 = np.asarray(A.multiply(A).sum(axis=1)).ravel()
    b2 = np.asarray(B.multiply(B).sum(axis=1)).ravel()
    d = a2[:, None] + b2[None, :] - 2.0 * np.asarray((A @ B.T).todense())
    return np.maximum(d, 0.0)


def _knn_vote(dist_row: np.ndarray, labels: np.ndarray, n_classes: int, k: int) -> tuple[int, np.ndarray]:
    nearest = np.argsort(dist_row, kind="stable")[:k]
    votes = np.bincount(labels[nearest], minlength=n_classes)
    dsum = np.bincount(labels[nearest], weights=np.sqrt(dist_row[nearest]), minlength=n_classes)
    tied = np.flatnonzero(votes == votes.max())
    # most votes, then smallest distance sum, then class order
    best = min(tied, key=lambda c: (dsum[c], c))
    return int(best), votes


@dataclass(eq=False)
class KNNModel:
    classes: tuple[str, ...]
    X: sp.csr_matrix
    labels: np.ndarray
    k: int = 5

    kind = "knn"

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def _run(self, X):
        X = _as_csr(X)
        if X.shape[1] != self.n_features:
            raise ClassifierError(f"feature dimension {X.shape[1]} does not match model ({self.n_features})")
        D = _sq_distances(X, self.X)
        return [_knn_vote(row, self.labels, len(self.classes), self.k) for row in D]

    def decision_scores(self, X) -> np.ndarray:
        """Vote share per class among the k nearest neighbours."""
        return np.array([votes / self.k for _, votes in self._run(X)])

    def predict(self, X) -> list[str]:
        return [self.classes[b] for b, _ in self._run(X)]

    def to_dict(self) -> dict:
        X = self.X
        return {
            "kind": self.kind,
            "classes": list(self.classes),
            "k": self.k,
            "n_features": int(X.shape[1]),
            "labels": self.labels.tolist(),
            "indptr": X.indptr.tolist(),
            "indices": X.indices.tolist(),
            "data": X.data.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "KNNModel":
        X = sp.csr_matrix((np.asarray(data["data"], dtype=np.float64), np.asarray(data["indices"], dtype=np.int64),
                           np.asarray(data["indptr"], dtype=np.int64)), shape=(len(data["labels"]), data["n_features"]))
        return cls(tuple(data["classes"]), X, np.asarray(data["labels"], dtype=np.int64), int(data["k"]))


def train_knn(X, y: Sequence[str], k: int = 5) -> KNNModel:
    X = _as_csr(X)
    if k < 1:
        raise ClassifierError("k must be >= 1")
    if k > X.shape[0]:
        raise ClassifierError(f"k={k} exceeds the {X.shape[0]} training points")
    classes, yi = _classes(list(y))
    return KNNModel(tuple(classes), X, yi, k)


def predict_knn(train_X, train_y: Sequence[str], X, k: int = 5) -> list[str]:
    """Majority label of the k nearest training points by Euclidean distance."""
    return train_knn(train_X, train_y, k).predict(X)


def train_classifier(name: str, X, y: Sequence[str], config: TrainConfig | None = None,
                     jobs: int = 1, **options):
    if name == "svm":
        return train_linear_svm(X, y, config, jobs=jobs)
    if name == "nb":
        return train_multinomial_nb(X, y, **options)
    if name == "knn":
        return train_knn(X, y, **options)
    raise ClassifierError(f"unknown classifier {name!r}; valid names: {', '.join(CLASSIFIERS)}")


def model_from_dict(data: dict):
    kinds = {"svm": LinearModel, "nb": NBModel, "knn": KNNModel}
    try:
        return kinds[data["kind"]].from_dict(data)
    except KeyError:
        raise ClassifierError(f"unknown model kind {data.get('kind')!r}") from None
