"""Corpus ingestion, document sampling and stratified folds.

Layout on disk::

    <root>/engine_a/<lang>.txt
    <root>/engine_b/<lang>.txt
    <root>/original/en.txt

One sentence per line, UTF-8.  Sentence ids are the 0-based index among the
non-blank lines of a file, so re-reading a file always yields the same ids.
"""

from __future__ import annotations

import logging
import re
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .rng import Xoshiro256, derive_seed

log = logging.getLogger(__name__)

LANGUAGES = ("de", "en", "es", "fr", "it", "ja", "ko", "nl", "tr", "zh")
ENGLISH = "en"
TRANSLATED_ENGINES = ("engine_a", "engine_b")
# untranslated English originals live in their own partition
ORIGINAL = "original"
ENGINES = TRANSLATED_ENGINES + (ORIGINAL,)

_WS_RUN = re.compile(r"\S+")


class CorpusError(ValueError):
    """Raised for malformed or incomplete corpus input."""


def word_count(text: str) -> int:
    """Number of maximal non-whitespace runs in ``text``."""
    return len(_WS_RUN.findall(text))


def check_language(code: str) -> str:
    if code not in LANGUAGES:
        raise CorpusError(f"unknown language code {code!r}; expected one of {', '.join(LANGUAGES)}")
    return code


@dataclass(frozen=True)
class SizeClass:
    name: str
    min_words: int
    max_words: int | None  # None means unbounded

    def contains(self, n_words: int) -> bool:
        if n_words < self.min_words:
            return False
        return self.max_words is None or n_words <= self.max_words


SIZE_CLASSES = {
    "S": SizeClass("S", 5, 50),
    "M": SizeClass("M", 51, 200),
    "L": SizeClass("L", 201, 1000),
    "XL": SizeClass("XL", 1001, None),
}


def size_class(name: str | SizeClass) -> SizeClass:
    if isinstance(name, SizeClass):
        return name
    try:
        return SIZE_CLASSES[name.upper()]
    except KeyError:
        raise CorpusError(f"unknown size class {name!r}; expected one of S, M, L, XL") from None


@dataclass(frozen=True)
class Sentence:
    id: int
    text: str
    word_count: int


@dataclass(frozen=True)
class Document:
    id: str
    language: str
    engine: str
    size_class: str
    sentence_ids: tuple[int, ...]
    text: str
    word_count: int


# ---------------------------------------------------------------------------
# manifest and corpus
# ---------------------------------------------------------------------------


@dataclass
class CorpusManifest:
    """Declares which (engine, language) cells a corpus must provide.

    Text form, one ``key = value`` per line, ``#`` starts a comment::

        engines = engine_a, engine_b
        languages = de, en, es, fr, it, ja, ko, nl, tr, zh
        sentences = 5000
        sentences.engine_a.de = 4800

    English is always read from ``original/en.txt``; every other language is
    read once per declared engine.
    """

    engines: tuple[str, ...] = TRANSLATED_ENGINES
    languages: tuple[str, ...] = LANGUAGES
    sentences: int | None = None
    cell_sentences: dict[tuple[str, str], int] = field(default_factory=dict)

    def __post_init__(self):
        for e in self.engines:
            if e not in TRANSLATED_ENGINES:
                raise CorpusError(f"unknown engine {e!r}; expected one of {', '.join(TRANSLATED_ENGINES)}")
        for code in self.languages:
            check_language(code)

    def cells(self) -> list[tuple[str, str]]:
        out = []
        for lang in sorted(self.languages):
            if lang == ENGLISH:
                out.append((ORIGINAL, lang))
            else:
                out.extend((e, lang) for e in sorted(self.engines))
        return out

    def expected(self, cell: tuple[str, str]) -> int | None:
        return self.cell_sentences.get(cell, self.sentences)

    @classmethod
    def parse(cls, text: str) -> "CorpusManifest":
        kwargs: dict = {}
        per_cell: dict[tuple[str, str], int] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CorpusError(f"manifest line {lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            if key == "engines":
                kwargs["engines"] = tuple(v.strip() for v in value.split(",") if v.strip())
            elif key == "languages":
                kwargs["languages"] = tuple(v.strip() for v in value.split(",") if v.strip())
            elif key == "sentences":
                kwargs["sentences"] = int(value)
            elif key.startswith("sentences."):
                parts = key.split(".")
                if len(parts) != 3:
                    raise CorpusError(f"manifest line {lineno}: expected sentences.<engine>.<lang>")
                per_cell[(parts[1], parts[2])] = int(value)
            else:
                raise CorpusError(f"manifest line {lineno}: unknown key {key!r}")
        return cls(cell_sentences=per_cell, **kwargs)

    @classmethod
    def read(cls, path: str | Path) -> "CorpusManifest":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def discover(cls, root: str | Path) -> "CorpusManifest":
        """All languages, and whichever engine directories exist (both if none do)."""
        root = Path(root)
        present = tuple(e for e in TRANSLATED_ENGINES if (root / e).is_dir())
        return cls(engines=present or TRANSLATED_ENGINES)

    def dumps(self) -> str:
        lines = [
            f"engines = {', '.join(self.engines)}",
            f"languages = {', '.join(self.languages)}",
        ]
        if self.sentences is not None:
            lines.append(f"sentences = {self.sentences}")
        for (e, lang), n in sorted(self.cell_sentences.items()):
            lines.append(f"sentences.{e}.{lang} = {n}")
        return "\n".join(lines) + "\n"


@dataclass
class Corpus:
    cells: dict[tuple[str, str], tuple[Sentence, ...]]

    def counts(self) -> dict[tuple[str, str], int]:
        return {cell: len(s) for cell, s in sorted(self.cells.items())}

    @property
    def languages(self) -> list[str]:
        return sorted({lang for _, lang in self.cells})

    @property
    def engines(self) -> list[str]:
        return sorted({e for e, _ in self.cells if e != ORIGINAL})

    def partition(self, engine: str) -> dict[str, tuple[str, tuple[Sentence, ...]]]:
        """language -> (engine, sentences) for one engine plus English originals."""
        out = {}
        for (e, lang), sents in sorted(self.cells.items()):
            if e == engine or e == ORIGINAL:
                out[lang] = (e, sents)
        return out


def read_sentences(path: Path) -> tuple[Sentence, ...]:
    raw = path.read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusError(f"{path}: invalid UTF-8 at byte offset {exc.start}") from None
    out = []
    for line in text.split("\n"):
        line = line.strip()
        if line:
            out.append(Sentence(len(out), line, word_count(line)))
    return tuple(out)


def load_corpus(root: str | Path, manifest: CorpusManifest | None = None,
                strict_counts: bool = False, jobs: int = 1) -> Corpus:
    """Read every manifest-declared cell below ``root``.

    Without a manifest, see :meth:`CorpusManifest.discover`.

    Raises :class:`CorpusError` for a missing cell file, for a ``.txt`` file
    whose language is not declared, for invalid UTF-8, and (with
    ``strict_counts``) when a cell's sentence count differs from the manifest.
    """
    root = Path(root)
    if manifest is None:
        manifest = CorpusManifest.discover(root)
    cells = manifest.cells()

    declared_dirs = {e for e, _ in cells}
    for engine in sorted(declared_dirs):
        allowed = {lang for e, lang in cells if e == engine}
        engine_dir = root / engine
        if not engine_dir.is_dir():
            continue
        for path in sorted(engine_dir.glob("*.txt")):
            if path.stem not in allowed:
                raise CorpusError(f"undeclared language code {path.stem!r} in {engine}/")

    for engine, lang in cells:
        if not (root / engine / f"{lang}.txt").is_file():
            raise CorpusError(f"missing cell {engine}/{lang}")

    def _read(cell):
        return read_sentences(root / cell[0] / f"{cell[1]}.txt")

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        sentences = list(pool.map(_read, cells))

    corpus = Corpus(dict(zip(cells, sentences)))
    if strict_counts:
        for cell, n in corpus.counts().items():
            want = manifest.expected(cell)
            if want is not None and n != want:
                raise CorpusError(f"cell {cell[0]}/{cell[1]} has {n} sentences, manifest expects {want}")
    return corpus


def write_corpus(corpus: Corpus, root: str | Path) -> None:
    root = Path(root)
    for (engine, lang), sents in corpus.cells.items():
        (root / engine).mkdir(parents=True, exist_ok=True)
        with open(root / engine / f"{lang}.txt", "w", encoding="utf-8", newline="\n") as fh:
            for s in sents:
                fh.write(s.text + "\n")


# ---------------------------------------------------------------------------
# document sampling
# ---------------------------------------------------------------------------


@dataclass
class DocumentSet:
    size_class: str
    engine: str
    seed: int
    documents: list[Document]

    def __len__(self):
        return len(self.documents)

    @property
    def labels(self) -> list[str]:
        return [d.language for d in self.documents]

    @property
    def texts(self) -> list[str]:
        return [d.text for d in self.documents]

    @property
    def languages(self) -> list[str]:
        return sorted({d.language for d in self.documents})

    def subset(self, languages: Iterable[str]) -> "DocumentSet":
        keep = set(languages)
        missing = keep.difference(self.languages)
        if missing:
            raise CorpusError(f"document set has no documents for {', '.join(sorted(missing))}")
        docs = [d for d in self.documents if d.language in keep]
        return DocumentSet(self.size_class, self.engine, self.seed, docs)

    def dumps(self) -> str:
        lines = [f"#docset size_class={self.size_class} engine={self.engine} seed={self.seed}"]
        for d in self.documents:
            lines.append("\t".join([
                d.id, d.language, d.engine, d.size_class, str(d.word_count),
                escape_field(d.text), ",".join(map(str, d.sentence_ids)),
            ]))
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "DocumentSet":
        lines = text.split("\n")
        if not lines or not lines[0].startswith("#docset"):
            raise CorpusError("not a document-set file (missing #docset header)")
        meta = dict(item.split("=", 1) for item in lines[0].split()[1:])
        docs = []
        for lineno, line in enumerate(lines[1:], 2):
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 7:
                raise CorpusError(f"document-set line {lineno}: expected 7 tab-separated fields")
            doc_id, lang, engine, size, wc, text, sids = parts
            docs.append(Document(
                doc_id, check_language(lang), engine, size,
                tuple(int(x) for x in sids.split(",") if x), unescape_field(text), int(wc),
            ))
        return cls(meta["size_class"], meta["engine"], int(meta["seed"]), docs)

    @classmethod
    def read(cls, path: str | Path) -> "DocumentSet":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}


def escape_field(text: str) -> str:
    return "".join(_ESCAPES.get(c, c) for c in text)


def unescape_field(text: str) -> str:
    out = []
    it = iter(text)
    for c in it:
        if c == "\\":
            nxt = next(it, "")
            out.append(_UNESCAPES.get(nxt, "\\" + nxt))
        else:
            out.append(c)
    return "".join(out)


def _sample_cell(sentences: Sequence[Sentence], cls: SizeClass, max_docs: int,
                 seed: int) -> list[list[Sentence]]:
    order = list(range(len(sentences)))
    Xoshiro256(seed).shuffle(order)
    pool = deque(order)
    docs: list[list[Sentence]] = []
    current: list[Sentence] = []
    n_words = 0
    stalled = 0  # sentences popped since the last finished document
    while pool and len(docs) < max_docs:
        if stalled >= len(pool) + len(current) and not current:
            # a full pass over the remaining pool finished nothing
            break
        s = sentences[pool.popleft()]
        stalled += 1
        current.append(s)
        n_words += s.word_count
        if cls.max_words is not None and n_words > cls.max_words:
            pool.extend(x.id for x in current)
            current, n_words = [], 0
        elif n_words >= cls.min_words:
            docs.append(current)
            current, n_words = [], 0
            stalled = 0
    return docs


def sample_documents(corpus: Corpus, size: str | SizeClass, max_docs: int = 1000,
                     seed: int = 0, engine: str | None = None, jobs: int = 1) -> DocumentSet:
    """Randomly combine sentences into documents of one size class.

    Each (language, engine) cell is sampled independently with seed
    ``derive_seed(seed, engine, language)``: shuffle the sentence ids, then
    append sentences until the document reaches the minimum word count.  A
    document that overshoots the maximum is abandoned and its sentences go
    back to the tail of the pool.  A sentence is used by at most one
    document.  Sampling stops at ``max_docs`` documents, when the pool runs
    dry, or after a full pass over the pool yields no new document.
    """
    cls = size_class(size)
    if max_docs < 1:
        raise ValueError("max_docs must be >= 1")
    if engine is None:
        if len(corpus.engines) != 1:
            raise CorpusError(f"corpus has engines {corpus.engines}; choose one with engine=")
        engine = corpus.engines[0]
    cells = corpus.partition(engine)
    if not any(e == engine for e, _ in cells.values()):
        raise CorpusError(f"corpus has no cells for engine {engine!r}")

    def _run(lang):
        e, sents = cells[lang]
        return _sample_cell(sents, cls, max_docs, derive_seed(seed, e, lang))

    langs = sorted(cells)
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        sampled = list(pool.map(_run, langs))

    documents = []
    for lang, groups in zip(langs, sampled):
        e = cells[lang][0]
        if not groups:
            log.warning("size class %s unreachable for cell %s/%s: no documents", cls.name, e, lang)
        elif len(groups) < max_docs:
            log.warning("cell %s/%s: only %d of %d %s documents", e, lang, len(groups), max_docs, cls.name)
        for i, group in enumerate(groups):
            documents.append(Document(
                id=f"{e}/{lang}/{cls.name}/{i:05d}",
                language=lang,
                engine=e,
                size_class=cls.name,
                sentence_ids=tuple(s.id for s in group),
                text=" ".join(s.text for s in group),
                word_count=sum(s.word_count for s in group),
            ))
    return DocumentSet(cls.name, engine, seed, documents)


# ---------------------------------------------------------------------------
# folds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    folds: np.ndarray  # fold index per document, aligned with the document set

    def train_test(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        test = np.flatnonzero(self.folds == fold)
        train = np.flatnonzero(self.folds != fold)
        return train, test

    def __iter__(self):
        for i in range(self.k):
            yield self.train_test(i)


def split_folds(labels: DocumentSet | Sequence[str], k: int = 5, seed: int = 0) -> FoldAssignment:
    """Stratified k-fold assignment.

    Within each class the documents are shuffled and dealt round-robin, so
    per-class fold counts differ by at most one.  The starting fold rotates
    with the running document count to keep total fold sizes balanced too.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if isinstance(labels, DocumentSet):
        labels = labels.labels
    labels = list(labels)
    folds = np.full(len(labels), -1, dtype=np.int64)
    offset = 0
    for cls in sorted(set(labels)):
        idx = [i for i, y in enumerate(labels) if y == cls]
        if len(idx) < k:
            raise CorpusError(f"class {cls!r} has {len(idx)} documents, fewer than k={k}")
        Xoshiro256(derive_seed(seed, "folds", cls)).shuffle(idx)
        for j, i in enumerate(idx):
            folds[i] = (offset + j) % k
        offset += len(idx)
    return FoldAssignment(k, folds)
