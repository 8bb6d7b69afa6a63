import logging

import numpy as np
import pytest

from mtsource import experiments
from mtsource.classifier import TrainConfig
from mtsource.corpus import LANGUAGES, CorpusError, DocumentSet
from mtsource.experiments import (ConfusionMatrix, ExperimentError, FeatureCache, cross_validate,
                                  enumerate_subsets, feature_combination_sweep, language_subset_experiment,
                                  length_experiment, random_baseline, single_feature_sweep)
from mtsource.features import CountTable


class FirstClass:
    """Always predicts the alphabetically first training label."""

    def __init__(self, X, y):
        self.label = sorted(set(y))[0]

    def predict(self, X):
        return [self.label] * X.shape[0]


def test_random_baseline():
    assert random_baseline(10) == 0.1
    assert random_baseline(2) == 0.5
    with pytest.raises(ExperimentError):
        random_baseline(1)


def test_enumerate_subsets():
    for m, n in ((2, 9), (3, 36), (4, 84), (10, 1)):
        subs = enumerate_subsets(LANGUAGES, m)
        assert len(subs) == n == len(set(subs))
        assert all("en" in s and len(s) == m for s in subs)
    with pytest.raises(ExperimentError):
        enumerate_subsets(LANGUAGES, 1)
    with pytest.raises(ExperimentError):
        enumerate_subsets(["de", "fr"], 2)


def test_first_class_gives_one_tenth(small_docset):
    res = cross_validate(small_docset, 13, FirstClass)
    assert res.accuracy == pytest.approx(0.1)
    assert res.confusion.matrix[:, 1:].sum() == 0


def test_oracle_classifier_is_perfect(small_docset):
    class Oracle:
        def __init__(self, X, y):
            pass

        def predict(self, X):
            return list(self._labels)

    # the oracle reads the gold labels of the test fold through the cache split
    original = FeatureCache.matrices

    def matrices(self, specs, train, test):
        Oracle._labels = [small_docset.documents[i].language for i in test]
        return original(self, specs, train, test)

    try:
        FeatureCache.matrices = matrices
        res = cross_validate(small_docset, 13, Oracle)
    finally:
        FeatureCache.matrices = original
    assert res.accuracy == 1.0
    assert np.count_nonzero(res.confusion.matrix - np.diag(np.diag(res.confusion.matrix))) == 0


def test_cv_deterministic_two_classes(small_docset):
    sub = small_docset.subset(["de", "en"])
    a = cross_validate(sub, 13, seed=4)
    b = cross_validate(sub, 13, seed=4)
    assert a.accuracy == b.accuracy
    assert np.array_equal(a.confusion.matrix, b.confusion.matrix)


def test_fold_hygiene(small_docset, monkeypatch):
    """Vocabulary and idf only ever see training rows, and test rows are never trained on."""
    seen = []
    original = CountTable.fit

    def spy(self, rows):
        seen.append(np.asarray(rows).copy())
        return original(self, rows)

    monkeypatch.setattr(CountTable, "fit", spy)
    from mtsource.corpus import split_folds
    from mtsource.rng import derive_seed
    cross_validate(small_docset, [13, 2], seed=9)
    folds = split_folds(small_docset, 5, derive_seed(9, "folds"))
    expected = [tr for tr, _ in folds]
    assert len(seen) == 2 * len(expected)
    for i, rows in enumerate(seen):
        assert np.array_equal(np.sort(rows), np.sort(expected[i // 2]))


def test_confusion_invariants(small_docset):
    res = cross_validate(small_docset, 8, "nb")
    counts = {c: small_docset.labels.count(c) for c in small_docset.languages}
    assert res.confusion.matrix.sum(axis=1).tolist() == [counts[c] for c in res.confusion.classes]
    assert res.confusion.accuracy == res.accuracy
    assert ConfusionMatrix.from_csv(res.confusion.to_csv()) == res.confusion


def test_languages_argument(small_docset):
    res = cross_validate(small_docset, 13, languages=["en", "fr"])
    assert res.confusion.classes == ("en", "fr")
    assert res.n_docs == small_docset.labels.count("en") + small_docset.labels.count("fr")
    with pytest.raises(ExperimentError):
        cross_validate(small_docset, 13, cache=FeatureCache(small_docset.subset(["en", "fr"])))


def test_too_few_documents(small_docset):
    tiny = DocumentSet("S", "engine_a", 0, small_docset.documents[:3] + small_docset.documents[-3:])
    with pytest.raises(CorpusError):
        cross_validate(tiny, 13)


def test_subset_report_structure(small_docset):
    rep = language_subset_experiment(small_docset, (2, 3, 10), features=[13], classifier="nb")
    per_subset = [r for r in rep.rows if ":" in r.xaxis]
    means = [r for r in rep.rows if ":" not in r.xaxis]
    assert len(per_subset) == 9 + 36 + 1
    assert [r.xaxis for r in means] == ["2", "3", "10"]
    for m, mean in zip((2, 3, 10), means):
        rows = [r for r in per_subset if r.xaxis.startswith(f"{m}:")]
        assert mean.accuracy == pytest.approx(np.mean([r.accuracy for r in rows]), abs=1e-15)
        assert mean.baseline == 1 / m
        assert all("en" in r.xaxis.split(":")[1].split("+") for r in rows)
    for key, cm in rep.confusions.items():
        assert cm.accuracy == rep.lookup(*key).accuracy


def test_length_report(small_surrogate):
    logging.disable(logging.WARNING)
    try:
        rep = length_experiment(small_surrogate, ("S", "M"), features=[13], max_docs=20)
    finally:
        logging.disable(logging.NOTSET)
    assert [r.xaxis for r in rep.rows] == ["S", "M"]
    assert all(r.baseline == 0.1 for r in rep.rows)
    with pytest.raises(ExperimentError):
        length_experiment(small_surrogate, ("Q",))


def test_feature_sweeps(small_docset):
    ids = [1, 2, 13]
    single = single_feature_sweep(small_docset, ids, classifier="nb")
    assert [r.feature for r in single.rows] == ["1", "2", "13"]
    assert single.best["engine_a"] in {"1", "2", "13"}
    combo = feature_combination_sweep(small_docset, [(13,), (13, 2)], classifier="nb")
    assert combo.lookup("engine_a", "13", "S").accuracy == single.lookup("engine_a", "13", "S").accuracy
    assert combo.rows[1].feature == "13+2"


def test_jobs_do_not_change_reports(small_docset):
    a = language_subset_experiment(small_docset, (2,), [13], jobs=1).to_csv()
    b = language_subset_experiment(small_docset, (2,), [13], jobs=4).to_csv()
    assert a == b


def test_report_csv_format(small_docset):
    rep = single_feature_sweep(small_docset, [13], classifier="nb", seed=5)
    lines = rep.to_csv().splitlines()
    assert lines[0] == "engine,feature,xaxis,accuracy,baseline,n_docs,protocol,seed"
    f = lines[1].split(",")
    assert f[0] == "engine_a" and f[2] == "S" and f[6] == "cv5" and f[7] == "5"
    assert len(f[3].split(".")[1]) == 6
