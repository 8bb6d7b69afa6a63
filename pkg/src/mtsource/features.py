"""Stylometric feature catalog (23 feature ids) and tf-idf weighting.

=====  ==============================================  ========
id     analyzer                                        tf-idf
=====  ==============================================  ========
1      punctuation occurrence                          no
2      word occurrence                                 no
3      word occurrence without stop words              no
4-7    character 1-, 2-, 3-, 4-grams                   no
8      character 1..4-grams combined                   no
9-13   as 4-8                                          yes
14-18  POS-tag 1-, 2-, 3-, 4-grams, 1..4 combined      no
19-23  as 14-18                                        yes
=====  ==============================================  ========

Counts are extracted once per document (:func:`extract_terms`), then a
:class:`Vocabulary` and :class:`IdfWeights` are fitted on training documents
only.  Raw-count features are left unnormalized; tf-idf features use the
smoothed idf ``ln((1 + N) / (1 + df)) + 1`` followed by L2 normalization.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Mapping, Sequence
from urllib.parse import quote, unquote

import numpy as np
import scipy.sparse as sp

from .postagger import TaggerModel, default_tagger, pos_tokenize, tag

ANALYZERS = ("punctuation", "word", "word_no_stop", "char_ngram", "pos_ngram")
POS_SEPARATOR = "|"

_WHITESPACE = re.compile(r"\s+")
_N_RANGES = ((1, 1), (2, 2), (3, 3), (4, 4), (1, 4))


class FeatureError(ValueError):
    pass


@lru_cache(maxsize=None)
def _data_lines(name: str) -> tuple[str, ...]:
    text = resources.files("mtsource").joinpath(f"data/{name}").read_text(encoding="utf-8")
    return tuple(line for line in text.split("\n") if line)


def stop_words() -> frozenset[str]:
    """The bundled 318-entry English stop-word list."""
    return frozenset(_data_lines("stopwords_en.txt"))


def default_punctuation() -> frozenset[str]:
    return frozenset(_data_lines("punctuation.txt"))


@dataclass(frozen=True)
class FeatureSpec:
    feature_id: int
    analyzer: str
    n_range: tuple[int, int] | None
    tfidf: bool
    lowercase: bool = True

    @property
    def is_pos(self) -> bool:
        return self.analyzer == "pos_ngram"

    @property
    def name(self) -> str:
        if self.analyzer == "punctuation":
            return "punctuation"
        if self.analyzer == "word":
            return "word_occurrence"
        if self.analyzer == "word_no_stop":
            return "word_occurrence_no_stop_words"
        lo, hi = self.n_range
        n = f"{lo}" if lo == hi else "n"
        base = "char" if self.analyzer == "char_ngram" else "pos"
        return f"{base}_{n}grams" + ("_tfidf" if self.tfidf else "")

    def to_dict(self) -> dict:
        return {"feature_id": self.feature_id, "lowercase": self.lowercase}


def feature_spec(feature_id: int, lowercase: bool = True) -> FeatureSpec:
    """Resolve a feature id 1-23 to its analyzer, n-gram range and weighting."""
    if not isinstance(feature_id, (int, np.integer)) or not 1 <= feature_id <= 23:
        raise FeatureError(f"feature id must be an integer in 1..23, got {feature_id!r}")
    fid = int(feature_id)
    if fid == 1:
        return FeatureSpec(1, "punctuation", None, False, lowercase)
    if fid == 2:
        return FeatureSpec(2, "word", None, False, lowercase)
    if fid == 3:
        return FeatureSpec(3, "word_no_stop", None, False, lowercase)
    block, offset = divmod(fid - 4, 5)
    analyzer = "char_ngram" if block < 2 else "pos_ngram"
    return FeatureSpec(fid, analyzer, _N_RANGES[offset], block % 2 == 1, lowercase)


ALL_FEATURE_IDS = tuple(range(1, 24))


# ---------------------------------------------------------------------------
# term extraction
# ---------------------------------------------------------------------------


def tokenize_words(text: str, lowercase: bool = True) -> list[str]:
    tokens = text.split()
    return [t.lower() for t in tokens] if lowercase else tokens


def extract_word_counts(text: str, drop_stopwords: bool = False, lowercase: bool = True,
                        stopwords: frozenset[str] | None = None) -> Counter:
    tokens = tokenize_words(text, lowercase)
    if drop_stopwords:
        stop = stop_words() if stopwords is None else stopwords
        tokens = [t for t in tokens if t.lower() not in stop]
    return Counter(tokens)


def extract_punctuation(text: str, punct_set: frozenset[str] | None = None) -> Counter:
    punct = default_punctuation() if punct_set is None else punct_set
    if not punct:
        raise FeatureError("punctuation set must not be empty")
    return Counter(c for c in text if c in punct)


def normalize_for_chars(text: str, lowercase: bool = True) -> str:
    text = _WHITESPACE.sub(" ", text)
    return text.lower() if lowercase else text


def extract_char_ngrams(text: str, n_range: tuple[int, int], lowercase: bool = True) -> Counter:
    """Counts of every contiguous character n-gram, whitespace runs collapsed to one space."""
    lo, hi = n_range
    if not 1 <= lo <= hi:
        raise FeatureError(f"invalid n-gram range {n_range!r}")
    text = normalize_for_chars(text, lowercase)
    counts: Counter = Counter()
    for n in range(lo, hi + 1):
        if n == 1:
            counts.update(text)
        else:
            counts.update(text[i:i + n] for i in range(len(text) - n + 1))
    return counts


def extract_pos_ngrams(tags: Sequence[str], n_range: tuple[int, int]) -> Counter:
    lo, hi = n_range
    if not 1 <= lo <= hi:
        raise FeatureError(f"invalid n-gram range {n_range!r}")
    tags = list(tags)
    counts: Counter = Counter()
    for n in range(lo, hi + 1):
        counts.update(POS_SEPARATOR.join(tags[i:i + n]) for i in range(len(tags) - n + 1))
    return counts


def _text_of(doc) -> str:
    return doc if isinstance(doc, str) else doc.text


def extract_terms(doc, spec: FeatureSpec, tagger: TaggerModel | None = None) -> Counter:
    """Raw term counts of one document under ``spec``.

    ``doc`` is a string or anything with a ``.text`` attribute.  For POS
    specs it may also be a ``(tokens, tags)`` pair, which skips the tagger.
    """
    if spec.is_pos:
        if isinstance(doc, tuple) and len(doc) == 2 and not isinstance(doc[0], str):
            tags = doc[1]
        else:
            tags = tag(pos_tokenize(_text_of(doc)), tagger or default_tagger())
        return extract_pos_ngrams(tags, spec.n_range)
    text = _text_of(doc)
    if spec.analyzer == "punctuation":
        return extract_punctuation(text)
    if spec.analyzer == "word":
        return extract_word_counts(text, False, spec.lowercase)
    if spec.analyzer == "word_no_stop":
        return extract_word_counts(text, True, spec.lowercase)
    return extract_char_ngrams(text, spec.n_range, spec.lowercase)


# ---------------------------------------------------------------------------
# vocabulary, idf, transform
# ---------------------------------------------------------------------------


class Vocabulary:
    """Terms in lexicographic (code point) order mapped to dense column indices."""

    __slots__ = ("terms", "index")

    def __init__(self, terms):
        self.terms = tuple(sorted(set(terms)))
        self.index = {t: i for i, t in enumerate(self.terms)}

    def __len__(self):
        return len(self.terms)

    def __contains__(self, term):
        return term in self.index

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.terms == other.terms

    def __repr__(self):
        return f"Vocabulary({len(self)} terms)"


def build_vocabulary(term_counts: Sequence[Mapping[str, float]]) -> Vocabulary:
    """Vocabulary over all terms of the given (training) documents."""
    if len(term_counts) == 0:
        raise FeatureError("cannot build a vocabulary from zero documents")
    terms: set[str] = set()
    for counts in term_counts:
        terms.update(t for t, v in counts.items() if v)
    return Vocabulary(terms)


@dataclass(frozen=True)
class IdfWeights:
    idf: np.ndarray
    n_docs: int

    def __eq__(self, other):
        return (isinstance(other, IdfWeights) and self.n_docs == other.n_docs
                and np.array_equal(self.idf, other.idf))


def smoothed_idf(df: np.ndarray, n_docs: int) -> np.ndarray:
    return np.log((1.0 + n_docs) / (1.0 + np.asarray(df, dtype=np.float64))) + 1.0


def count_matrix(term_counts: Sequence[Mapping[str, float]], vocab: Vocabulary) -> sp.csr_matrix:
    """Sparse document-term matrix; terms outside ``vocab`` are dropped."""
    index = vocab.index
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for counts in term_counts:
        cols = sorted((index[t], v) for t, v in counts.items() if t in index and v)
        indices.extend(c for c, _ in cols)
        data.extend(v for _, v in cols)
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(term_counts), len(vocab)),
    )


def fit_idf(X: sp.spmatrix | Sequence[Mapping[str, float]], vocab: Vocabulary) -> IdfWeights:
    """Smoothed idf from a training document-term matrix (or raw count dicts)."""
    if not sp.issparse(X):
        X = count_matrix(X, vocab)
    X = sp.csr_matrix(X)
    if X.shape[1] != len(vocab):
        raise FeatureError("matrix columns do not match the vocabulary")
    df = np.bincount(X.indices[X.data != 0], minlength=X.shape[1])
    return IdfWeights(smoothed_idf(df, X.shape[0]), X.shape[0])


def l2_normalize_rows(X: sp.csr_matrix) -> sp.csr_matrix:
    X = sp.csr_matrix(X, dtype=np.float64, copy=True)
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    # all-zero rows stay zero
    X.data *= np.repeat(scale, np.diff(X.indptr))
    return X


def transform(counts, vocab: Vocabulary, idf: IdfWeights | None = None,
              l2: bool | None = None) -> sp.csr_matrix:
    """Weight raw counts into feature vectors.

    ``counts`` is a sparse matrix over ``vocab`` or a list of count dicts.
    With ``idf`` each count is multiplied by its term's idf; ``l2`` defaults
    to True exactly when ``idf`` is given.
    """
    X = counts if sp.issparse(counts) else count_matrix(counts, vocab)
    X = sp.csr_matrix(X, dtype=np.float64, copy=True)
    if idf is not None:
        X.data *= idf.idf[X.indices]
    if l2 is None:
        l2 = idf is not None
    if l2:
        X = l2_normalize_rows(X)
    X.sort_indices()
    return X


@dataclass(frozen=True)
class FittedFeatures:
    spec: FeatureSpec
    vocab: Vocabulary
    idf: IdfWeights | None
    tagger: TaggerModel | None = None

    def transform_counts(self, term_counts: Sequence[Mapping[str, float]]) -> sp.csr_matrix:
        return transform(count_matrix(term_counts, self.vocab), self.vocab, self.idf)


def fit_features(term_counts: Sequence[Mapping[str, float]], spec: FeatureSpec,
                 tagger: TaggerModel | None = None) -> FittedFeatures:
    vocab = build_vocabulary(term_counts)
    idf = fit_idf(count_matrix(term_counts, vocab), vocab) if spec.tfidf else None
    if spec.is_pos and tagger is None:
        tagger = default_tagger()
    return FittedFeatures(spec, vocab, idf, tagger if spec.is_pos else None)


def featurize(documents: Sequence, spec: FeatureSpec | int, fitted: FittedFeatures | None = None,
              tagger: TaggerModel | None = None) -> tuple[sp.csr_matrix, FittedFeatures]:
    """Feature matrix for ``documents``.

    Without ``fitted`` the vocabulary and idf are learned from ``documents``
    (training mode); with ``fitted`` they are reused untouched.
    """
    if not isinstance(spec, FeatureSpec):
        spec = feature_spec(spec)
    if fitted is not None:
        tagger = fitted.tagger
    terms = [extract_terms(d, spec, tagger) for d in documents]
    if fitted is None:
        fitted = fit_features(terms, spec, tagger)
    return fitted.transform_counts(terms), fitted


def featurize_combination(documents: Sequence, specs: Sequence[FeatureSpec | int],
                          fitted: Sequence[FittedFeatures] | None = None,
                          tagger: TaggerModel | None = None):
    """Horizontally stacked per-spec blocks; returns (matrix, fitted list, block offsets)."""
    blocks, fits = [], []
    for i, s in enumerate(specs):
        X, f = featurize(documents, s, None if fitted is None else fitted[i], tagger)
        blocks.append(X)
        fits.append(f)
    offsets = np.cumsum([0] + [b.shape[1] for b in blocks]).tolist()
    return sp.hstack(blocks, format="csr"), fits, offsets


# ---------------------------------------------------------------------------
# cached counts for repeated train/test splits
# ---------------------------------------------------------------------------


class CountTable:
    """Raw counts for a fixed document list over the union of all their terms.

    Splitting this table by rows and keeping the columns with nonzero
    training document frequency gives exactly the vocabulary, idf and
    matrices that :func:`featurize` would build from the training rows,
    without re-extracting terms for every fold.
    """

    def __init__(self, term_counts: Sequence[Mapping[str, float]], spec: FeatureSpec,
                 tagger: TaggerModel | None = None):
        self.spec = spec
        self.tagger = tagger if spec.is_pos else None
        self.all_terms = build_vocabulary(term_counts) if len(term_counts) else Vocabulary(())
        self.X = count_matrix(term_counts, self.all_terms)

    @classmethod
    def from_documents(cls, documents: Sequence, spec: FeatureSpec | int,
                       tagger: TaggerModel | None = None) -> "CountTable":
        if not isinstance(spec, FeatureSpec):
            spec = feature_spec(spec)
        if spec.is_pos and tagger is None:
            tagger = default_tagger()
        return cls([extract_terms(d, spec, tagger) for d in documents], spec, tagger)

    def fit(self, rows) -> tuple[FittedFeatures, np.ndarray]:
        rows = np.asarray(rows, dtype=np.int64)
        if rows.size == 0:
            raise FeatureError("cannot build a vocabulary from zero documents")
        Xr = self.X[rows]
        df = np.bincount(Xr.indices, minlength=Xr.shape[1])
        cols = np.flatnonzero(df)
        vocab = Vocabulary(self.all_terms.terms[c] for c in cols)
        idf = IdfWeights(smoothed_idf(df[cols], rows.size), int(rows.size)) if self.spec.tfidf else None
        return FittedFeatures(self.spec, vocab, idf, self.tagger), cols

    def split(self, train_rows, test_rows):
        """(X_train, X_test, fitted) with the vocabulary fitted on ``train_rows`` only."""
        fitted, cols = self.fit(train_rows)
        out = []
        for rows in (train_rows, test_rows):
            counts = self.X[np.asarray(rows, dtype=np.int64)][:, cols]
            out.append(transform(counts, fitted.vocab, fitted.idf))
        return out[0], out[1], fitted


# ---------------------------------------------------------------------------
# text dump for cross-checks
# ---------------------------------------------------------------------------


def _fmt_value(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else format(float(v), ".17g")


def dump_matrix(doc_ids: Sequence[str], X: sp.spmatrix, vocab: Vocabulary) -> str:
    """``doc_id<TAB>term:value,...`` per row with percent-escaped terms."""
    X = sp.csr_matrix(X)
    lines = []
    for i, doc_id in enumerate(doc_ids):
        lo, hi = X.indptr[i], X.indptr[i + 1]
        cells = [f"{quote(vocab.terms[j], safe='')}:{_fmt_value(v)}"
                 for j, v in zip(X.indices[lo:hi], X.data[lo:hi])]
        lines.append(f"{doc_id}\t{','.join(cells)}")
    return "\n".join(lines) + "\n"


def parse_matrix_dump(text: str) -> list[tuple[str, dict[str, float]]]:
    rows = []
    for line in text.split("\n"):
        if not line:
            continue
        doc_id, _, body = line.partition("\t")
        cells = {}
        for item in filter(None, body.split(",")):
            term, _, value = item.rpartition(":")
            cells[unquote(term)] = float(value)
        rows.append((doc_id, cells))
    return rows
