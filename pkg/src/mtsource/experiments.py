"""Cross-validation harness and the experiment sweeps.

* :func:`language_subset_experiment` -- accuracy versus number of candidate
  languages (every subset of size m that contains English), short documents.
* :func:`length_experiment` -- accuracy versus document size class, all
  languages.
* :func:`single_feature_sweep` and :func:`feature_combination_sweep` --
  one cross-validation run per feature id or per feature combination.

Reports are lists of :class:`ReportRow` and serialize to CSV with the header
``engine,feature,xaxis,accuracy,baseline,n_docs,protocol,seed``.
"""

from __future__ import annotations

import csv
import io
import itertools
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .classifier import TrainConfig, train_classifier
from .corpus import ENGLISH, LANGUAGES, SIZE_CLASSES, Corpus, DocumentSet, sample_documents, split_folds
from .features import ALL_FEATURE_IDS, CountTable, FeatureSpec, feature_spec
from .postagger import TaggerModel
from .rng import derive_seed

REPORT_HEADER = ("engine", "feature", "xaxis", "accuracy", "baseline", "n_docs", "protocol", "seed")

# features plotted against the number of languages and against document length
SUBSET_FEATURES = (13, 8, 23, 18, 2)
LENGTH_FEATURES = (12, 7, 22, 17, 2)
DEFAULT_COMBINATIONS = ((13,), (13, 23), (13, 8), (13, 12), (13, 7))


class ExperimentError(ValueError):
    pass


def random_baseline(n_languages: int) -> float:
    """Expected accuracy of uniform guessing among ``n_languages`` classes."""
    if n_languages < 2:
        raise ExperimentError("a baseline needs at least two candidate languages")
    return 1.0 / n_languages


@dataclass(eq=False)
class ConfusionMatrix:
    classes: tuple[str, ...]
    matrix: np.ndarray  # rows: true language, columns: predicted language

    def __eq__(self, other):
        return (isinstance(other, ConfusionMatrix) and self.classes == other.classes
                and np.array_equal(self.matrix, other.matrix))

    @classmethod
    def from_predictions(cls, y_true: Sequence[str], y_pred: Sequence[str],
                         classes: Sequence[str] | None = None) -> "ConfusionMatrix":
        classes = tuple(sorted(set(y_true) | set(y_pred))) if classes is None else tuple(classes)
        index = {c: i for i, c in enumerate(classes)}
        m = np.zeros((len(classes), len(classes)), dtype=np.int64)
        for t, p in zip(y_true, y_pred):
            m[index[t], index[p]] += 1
        return cls(classes, m)

    @property
    def total(self) -> int:
        return int(self.matrix.sum())

    @property
    def accuracy(self) -> float:
        return int(np.trace(self.matrix)) / self.total if self.total else 0.0

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.classes != other.classes:
            raise ExperimentError("cannot add confusion matrices over different classes")
        return ConfusionMatrix(self.classes, self.matrix + other.matrix)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["", *self.classes])
        for c, row in zip(self.classes, self.matrix):
            w.writerow([c, *row.tolist()])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ConfusionMatrix":
        rows = list(csv.reader(io.StringIO(text)))
        classes = tuple(rows[0][1:])
        return cls(classes, np.array([[int(v) for v in r[1:]] for r in rows[1:]], dtype=np.int64))


@dataclass
class CVResult:
    accuracy: float
    confusion: ConfusionMatrix
    n_docs: int
    correct: int


@dataclass
class ReportRow:
    engine: str
    feature: str
    xaxis: str
    accuracy: float
    baseline: float
    n_docs: int
    protocol: str
    seed: int

    def as_csv_fields(self) -> list[str]:
        return [self.engine, self.feature, self.xaxis, f"{self.accuracy:.6f}", f"{self.baseline:.6f}",
                str(self.n_docs), self.protocol, str(self.seed)]


@dataclass
class ExperimentReport:
    rows: list[ReportRow] = field(default_factory=list)
    confusions: dict[tuple[str, str, str], ConfusionMatrix] = field(default_factory=dict)
    best: dict[str, str] = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        for r in self.rows:
            w.writerow(r.as_csv_fields())
        return buf.getvalue()

    def lookup(self, engine: str, feature: str, xaxis: str) -> ReportRow:
        for r in self.rows:
            if (r.engine, r.feature, r.xaxis) == (engine, feature, xaxis):
                return r
        raise KeyError((engine, feature, xaxis))

    def extend(self, other: "ExperimentReport") -> None:
        self.rows.extend(other.rows)
        self.confusions.update(other.confusions)
        self.best.update(other.best)


def _specs(features) -> list[FeatureSpec]:
    if isinstance(features, (int, np.integer, FeatureSpec)):
        features = [features]
    return [f if isinstance(f, FeatureSpec) else feature_spec(f) for f in features]


def feature_label(features) -> str:
    return "+".join(str(s.feature_id) for s in _specs(features))


class FeatureCache:
    """Per-spec :class:`CountTable` for one document set, built on demand."""

    def __init__(self, doc_set: DocumentSet, tagger: TaggerModel | None = None):
        self.doc_set = doc_set
        self.tagger = tagger
        self._tables: dict[tuple[int, bool], CountTable] = {}
        self._lock = threading.Lock()

    def table(self, spec: FeatureSpec) -> CountTable:
        key = (spec.feature_id, spec.lowercase)
        with self._lock:
            if key not in self._tables:
                self._tables[key] = CountTable.from_documents(self.doc_set.documents, spec, self.tagger)
            return self._tables[key]

    def matrices(self, specs: Sequence[FeatureSpec], train, test):
        tr_blocks, te_blocks = [], []
        for s in specs:
            Xtr, Xte, _ = self.table(s).split(train, test)
            tr_blocks.append(Xtr)
            te_blocks.append(Xte)
        if len(specs) == 1:
            return tr_blocks[0], te_blocks[0]
        return sp.hstack(tr_blocks, format="csr"), sp.hstack(te_blocks, format="csr")


def _cv_rows(cache: FeatureCache, rows: np.ndarray, specs: Sequence[FeatureSpec], classifier: str,
             config: TrainConfig, k: int, seed: int, options: dict) -> CVResult:
    labels = np.asarray(cache.doc_set.labels, dtype=object)
    sub_labels = labels[rows]
    folds = split_folds(list(sub_labels), k, derive_seed(seed, "folds"))
    classes = tuple(sorted(set(sub_labels)))
    confusion = ConfusionMatrix(classes, np.zeros((len(classes), len(classes)), dtype=np.int64))
    for train, test in folds:
        Xtr, Xte = cache.matrices(specs, rows[train], rows[test])
        if callable(classifier):
            model = classifier(Xtr, list(sub_labels[train]))
        else:
            model = train_classifier(classifier, Xtr, list(sub_labels[train]), config, **options)
        pred = model.predict(Xte)
        confusion = confusion + ConfusionMatrix.from_predictions(list(sub_labels[test]), pred, classes)
    correct = int(np.trace(confusion.matrix))
    return CVResult(correct / len(rows), confusion, len(rows), correct)


def cross_validate(doc_set: DocumentSet, features, classifier: str = "svm",
                   config: TrainConfig | None = None, k: int = 5, seed: int = 0,
                   cache: FeatureCache | None = None, languages: Iterable[str] | None = None,
                   **options) -> CVResult:
    """Stratified k-fold accuracy and summed confusion matrix.

    Vocabulary, idf and classifier are fitted on the k-1 training folds
    only.  ``features`` is one feature id/spec or a list (concatenated
    blocks).  ``classifier`` is a registered name or a callable
    ``(X, y) -> model`` with a ``predict`` method.  ``languages`` restricts the run to a subset of classes.
    """
    config = config or TrainConfig()
    cache = cache or FeatureCache(doc_set)
    if cache.doc_set is not doc_set:
        raise ExperimentError("feature cache belongs to a different document set")
    labels = doc_set.labels
    if languages is None:
        rows = np.arange(len(labels))
    else:
        keep = set(languages)
        missing = keep.difference(labels)
        if missing:
            raise ExperimentError(f"no documents for language(s) {', '.join(sorted(missing))}")
        rows = np.array([i for i, y in enumerate(labels) if y in keep], dtype=np.int64)
    return _cv_rows(cache, rows, _specs(features), classifier, config, k, seed, options)


def _run_cells(cells, fn, jobs: int):
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        return list(pool.map(fn, cells))


def _as_doc_sets(source, size: str, max_docs: int, seed: int) -> list[DocumentSet]:
    if isinstance(source, DocumentSet):
        return [source]
    if isinstance(source, Corpus):
        return [sample_documents(source, size, max_docs, derive_seed(seed, "sample", size), engine=e)
                for e in source.engines]
    return list(source)


def enumerate_subsets(languages: Sequence[str], m: int) -> list[tuple[str, ...]]:
    """All m-language subsets that contain English, each sorted."""
    if ENGLISH not in languages:
        raise ExperimentError("language subsets require English documents")
    others = sorted(set(languages) - {ENGLISH})
    if not 2 <= m <= len(others) + 1:
        raise ExperimentError(f"subset size {m} outside 2..{len(others) + 1}")
    return [tuple(sorted((ENGLISH, *combo))) for combo in itertools.combinations(others, m - 1)]


def language_subset_experiment(source, subset_sizes: Sequence[int] = (2, 3, 4, 10),
                               features: Sequence = SUBSET_FEATURES, classifier: str = "svm",
                               config: TrainConfig | None = None, k: int = 5, seed: int = 0,
                               max_docs: int = 1000, jobs: int = 1, **options) -> ExperimentReport:
    """Accuracy as a function of the number of candidate source languages.

    ``source`` is a corpus (short documents are sampled per engine) or one
    or more short-document sets.  For every size m below the full language
    count each English-containing subset is cross-validated; the report has
    one row per subset (xaxis ``"m:lang+lang..."``) and one mean row per m
    (xaxis ``"m"``, n_docs summed over its subsets).
    """
    report = ExperimentReport()
    protocol = f"cv{k}"
    for doc_set in _as_doc_sets(source, "S", max_docs, seed):
        langs = doc_set.languages
        missing = set(LANGUAGES).difference(langs) if max(subset_sizes) >= len(LANGUAGES) else set()
        if missing:
            raise ExperimentError(f"engine {doc_set.engine}: missing language(s) {', '.join(sorted(missing))}")
        cache = FeatureCache(doc_set)
        for feats in features:
            specs = _specs(feats)
            label = feature_label(specs)
            for m in subset_sizes:
                subsets = [tuple(langs)] if m == len(langs) else enumerate_subsets(langs, m)
                results = _run_cells(
                    subsets,
                    lambda sub: cross_validate(doc_set, specs, classifier, config, k, seed, cache, sub, **options),
                    jobs,
                )
                for sub, res in zip(subsets, results):
                    xaxis = f"{m}:{'+'.join(sub)}"
                    report.rows.append(ReportRow(doc_set.engine, label, xaxis, res.accuracy,
                                                 random_baseline(m), res.n_docs, protocol, seed))
                    report.confusions[(doc_set.engine, label, xaxis)] = res.confusion
                mean = float(np.mean([r.accuracy for r in results]))
                report.rows.append(ReportRow(doc_set.engine, label, str(m), mean, random_baseline(m),
                                             sum(r.n_docs for r in results), protocol, seed))
    return report


def length_experiment(source, size_classes: Sequence[str] = ("S", "M", "L", "XL"),
                      features: Sequence = LENGTH_FEATURES, classifier: str = "svm",
                      config: TrainConfig | None = None, k: int = 5, seed: int = 0,
                      max_docs: int = 1000, jobs: int = 1, **options) -> ExperimentReport:
    """Accuracy per document size class over all languages.

    ``source`` is a corpus (sampled per engine and size class) or a mapping
    from size class name to one or more document sets.
    """
    report = ExperimentReport()
    protocol = f"cv{k}"
    cells = []
    for size in size_classes:
        if size not in SIZE_CLASSES:
            raise ExperimentError(f"unknown size class {size!r}")
        sets = _as_doc_sets(source[size], size, max_docs, seed) if isinstance(source, dict) \
            else _as_doc_sets(source, size, max_docs, seed)
        for doc_set in sets:
            cache = FeatureCache(doc_set)
            for feats in features:
                cells.append((size, doc_set, cache, _specs(feats)))

    def run(cell):
        size, doc_set, cache, specs = cell
        return cross_validate(doc_set, specs, classifier, config, k, seed, cache, **options)

    for (size, doc_set, _, specs), res in zip(cells, _run_cells(cells, run, jobs)):
        label = feature_label(specs)
        report.rows.append(ReportRow(doc_set.engine, label, size, res.accuracy,
                                     random_baseline(len(doc_set.languages)), res.n_docs, protocol, seed))
        report.confusions[(doc_set.engine, label, size)] = res.confusion
    return report


def _sweep(source, combos: Sequence[Sequence], classifier, config, k, seed, max_docs, jobs,
           options) -> ExperimentReport:
    report = ExperimentReport()
    protocol = f"cv{k}"
    for doc_set in _as_doc_sets(source, "S", max_docs, seed):
        cache = FeatureCache(doc_set)
        spec_lists = [_specs(c) for c in combos]
        results = _run_cells(
            spec_lists,
            lambda specs: cross_validate(doc_set, specs, classifier, config, k, seed, cache, **options),
            jobs,
        )
        baseline = random_baseline(len(doc_set.languages))
        best = None
        for specs, res in zip(spec_lists, results):
            label = feature_label(specs)
            report.rows.append(ReportRow(doc_set.engine, label, doc_set.size_class, res.accuracy,
                                         baseline, res.n_docs, protocol, seed))
            report.confusions[(doc_set.engine, label, doc_set.size_class)] = res.confusion
            if best is None or res.accuracy > best[1]:
                best = (label, res.accuracy)
        report.best[doc_set.engine] = best[0]
    return report


def single_feature_sweep(source, feature_ids: Sequence[int] = ALL_FEATURE_IDS, classifier: str = "svm",
                         config: TrainConfig | None = None, k: int = 5, seed: int = 0,
                         max_docs: int = 1000, jobs: int = 1, **options) -> ExperimentReport:
    """One cross-validation per feature id, rows sorted by id; ``report.best`` holds the winner per engine."""
    ids = sorted(feature_ids)
    return _sweep(source, [(i,) for i in ids], classifier, config, k, seed, max_docs, jobs, options)


def feature_combination_sweep(source, combinations: Sequence[Sequence] = DEFAULT_COMBINATIONS,
                              classifier: str = "svm", config: TrainConfig | None = None, k: int = 5,
                              seed: int = 0, max_docs: int = 1000, jobs: int = 1,
                              **options) -> ExperimentReport:
    """Cross-validate block-concatenated feature combinations."""
    return _sweep(source, combinations, classifier, config, k, seed, max_docs, jobs, options)
