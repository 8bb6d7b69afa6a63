"""Averaged-perceptron part-of-speech tagger over a coarse universal tagset.

The default model is trained on first use from a small hand-tagged English
seed corpus shipped with the package.  Texts that were tagged elsewhere can
bypass the tagger entirely through :func:`load_pretagged`.
"""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .rng import Xoshiro256

TAGSET = ("ADJ", "ADP", "ADV", "CONJ", "DET", "NOUN", "NUM", "PART", "PRON", "PUNCT", "VERB", "X")
FORMAT_VERSION = 1

_TOKEN = re.compile(r"\w+(?:[-'’]\w+)*|[^\w\s]")
_HAS_WORDCHAR = re.compile(r"\w")


class TaggerError(ValueError):
    pass


def pos_tokenize(text: str) -> list[str]:
    """Split text into word tokens and single punctuation marks."""
    return _TOKEN.findall(text)


def _shape(word: str) -> str:
    if word.isdigit():
        return "digits"
    if any(c.isdigit() for c in word):
        return "hasdigit"
    if word[:1].isupper():
        return "cap"
    if "-" in word:
        return "hyphen"
    return "lower"


def _features(i: int, word: str, context: Sequence[str], prev: str, prev2: str) -> list[str]:
    w = word.lower()
    nxt = context[i + 1].lower() if i + 1 < len(context) else "<end>"
    return [
        "bias",
        "w=" + w,
        "s1=" + w[-1:],
        "s2=" + w[-2:],
        "s3=" + w[-3:],
        "p=" + prev,
        "pp=" + prev2 + "|" + prev,
        "pw=" + prev + "|" + w,
        "n=" + nxt,
        "shape=" + _shape(word),
        "cap=" + str(word[:1].isupper() and i > 0),
    ]


@dataclass
class TaggerModel:
    weights: dict[str, dict[str, float]] = field(default_factory=dict)
    lexicon: dict[str, str] = field(default_factory=dict)
    tagset: tuple[str, ...] = TAGSET

    def _best(self, feats: Iterable[str]) -> str:
        scores = dict.fromkeys(self.tagset, 0.0)
        for f in feats:
            row = self.weights.get(f)
            if row:
                for t, v in row.items():
                    scores[t] += v
        # first maximal tag in tagset order
        return max(self.tagset, key=lambda t: scores[t])

    def tag(self, tokens: Sequence[str]) -> list[str]:
        return tag(tokens, self)

    def to_dict(self) -> dict:
        return {
            "format": "mtsource-tagger",
            "version": FORMAT_VERSION,
            "tagset": list(self.tagset),
            "lexicon": dict(sorted(self.lexicon.items())),
            "weights": {f: dict(sorted(row.items())) for f, row in sorted(self.weights.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TaggerModel":
        if data.get("format") != "mtsource-tagger" or data.get("version") != FORMAT_VERSION:
            raise TaggerError("unsupported tagger model format")
        return cls(
            weights={f: {t: float(v) for t, v in row.items()} for f, row in data["weights"].items()},
            lexicon=dict(data["lexicon"]),
            tagset=tuple(data["tagset"]),
        )


def tag(tokens: Sequence[str], model: TaggerModel) -> list[str]:
    """Greedy left-to-right tagging; one tag per token."""
    tags: list[str] = []
    prev, prev2 = "<s>", "<s2>"
    for i, word in enumerate(tokens):
        if "PUNCT" in model.tagset and not _HAS_WORDCHAR.search(word):
            t = "PUNCT"
        else:
            t = model.lexicon.get(word.lower())
            if t is None:
                t = model._best(_features(i, word, tokens, prev, prev2))
        tags.append(t)
        prev2, prev = prev, t
    return tags


def _build_lexicon(corpus, min_freq: int, min_ratio: float) -> dict[str, str]:
    counts: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    for tokens, tags in corpus:
        for w, t in zip(tokens, tags):
            counts[w.lower()][t] += 1
    lexicon = {}
    for w, by_tag in counts.items():
        n = sum(by_tag.values())
        t, c = max(sorted(by_tag.items()), key=lambda kv: kv[1])
        if n >= min_freq and c / n >= min_ratio:
            lexicon[w] = t
    return lexicon


def train_tagger(corpus: Sequence[tuple[Sequence[str], Sequence[str]]], epochs: int = 10,
                 seed: int = 0, tagset: Sequence[str] = TAGSET,
                 lexicon_min_freq: int = 3, lexicon_min_ratio: float = 0.97) -> TaggerModel:
    """Train an averaged perceptron; sentence order is reshuffled every epoch."""
    corpus = [(list(toks), list(tags)) for toks, tags in corpus]
    if not corpus or not any(toks for toks, _ in corpus):
        raise TaggerError("cannot train a tagger on an empty corpus")
    allowed = set(tagset)
    for n, (toks, tags) in enumerate(corpus):
        if len(toks) != len(tags):
            raise TaggerError(f"sentence {n}: {len(toks)} tokens but {len(tags)} tags")
        bad = [t for t in tags if t not in allowed]
        if bad:
            raise TaggerError(f"sentence {n}: tag {bad[0]!r} is not in the tagset")

    model = TaggerModel(lexicon=_build_lexicon(corpus, lexicon_min_freq, lexicon_min_ratio),
                        tagset=tuple(tagset))
    totals: dict[tuple[str, str], float] = defaultdict(float)
    stamps: dict[tuple[str, str], int] = defaultdict(int)
    step = 0

    def update(truth: str, guess: str, feats: list[str]) -> None:
        for f in feats:
            row = model.weights.setdefault(f, {})
            for t, delta in ((truth, 1.0), (guess, -1.0)):
                key = (f, t)
                w = row.get(t, 0.0)
                totals[key] += (step - stamps[key]) * w
                stamps[key] = step
                row[t] = w + delta

    rng = Xoshiro256(seed)
    order = list(range(len(corpus)))
    for _ in range(epochs):
        rng.shuffle(order)
        for idx in order:
            tokens, gold = corpus[idx]
            prev, prev2 = "<s>", "<s2>"
            for i, word in enumerate(tokens):
                if _HAS_WORDCHAR.search(word) and word.lower() not in model.lexicon:
                    feats = _features(i, word, tokens, prev, prev2)
                    guess = model._best(feats)
                    step += 1
                    if guess != gold[i]:
                        update(gold[i], guess, feats)
                # teacher forcing on the tag history
                prev2, prev = prev, gold[i]

    for f, row in model.weights.items():
        for t in list(row):
            key = (f, t)
            total = totals[key] + (step - stamps[key]) * row[t]
            avg = total / step if step else 0.0
            if avg:
                row[t] = avg
            else:
                del row[t]
    model.weights = {f: row for f, row in model.weights.items() if row}
    return model


def parse_pretagged(text: str) -> list[tuple[list[str], list[str]]]:
    """Parse ``token/TAG`` lines; one document per line, empty lines are empty documents."""
    docs = []
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    for lineno, line in enumerate(lines, 1):
        tokens, tags = [], []
        col = 1
        for item in line.split(" "):
            if item:
                cut = item.rfind("/")
                if cut <= 0 or cut == len(item) - 1:
                    raise TaggerError(f"line {lineno}, column {col}: malformed token {item!r} (expected token/TAG)")
                tokens.append(item[:cut])
                tags.append(item[cut + 1:])
            col += len(item) + 1
        docs.append((tokens, tags))
    return docs


def load_pretagged(path: str | Path) -> list[tuple[list[str], list[str]]]:
    return parse_pretagged(Path(path).read_text(encoding="utf-8"))


@lru_cache(maxsize=1)
def default_tagger() -> TaggerModel:
    """Model trained on the bundled seed corpus (deterministic, cached)."""
    text = resources.files("mtsource").joinpath("data/seed_tagged.txt").read_text(encoding="utf-8")
    return train_tagger(parse_pretagged(text), epochs=10, seed=0)


def tag_text(text: str, model: TaggerModel | None = None) -> list[str]:
    return tag(pos_tokenize(text), model or default_tagger())
