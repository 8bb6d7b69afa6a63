"""Synthetic stand-in corpus: one order-2 character Markov chain per language.

Every language shares a base transition table and mixes in a private
perturbation of weight ``distinctness``; each engine adds its own small
perturbation on top.  Small ``distinctness`` makes the languages hard to
tell apart from short documents while long documents stay separable.
"""

from __future__ import annotations

import bisect
import string

import numpy as np

from .corpus import ENGLISH, LANGUAGES, ORIGINAL, TRANSLATED_ENGINES, Corpus, Sentence, word_count
from .rng import derive_seed

ALPHABET = " " + string.ascii_lowercase[:19]


def _random_table(rng: np.random.Generator, n: int, concentration: float) -> np.ndarray:
    return rng.dirichlet(np.full(n, concentration), size=(n, n))


def _cumulative(table: np.ndarray, space_rate: float) -> list[list[list[float]]]:
    table = table.copy()
    table[:, :, 0] = 0.0
    table /= table.sum(axis=2, keepdims=True)
    # fixed word-break probability, no double spaces
    table[:, 1:, 1:] *= 1.0 - space_rate
    table[:, 1:, 0] = space_rate
    cum = np.cumsum(table, axis=2)
    cum[..., -1] = 1.0
    return cum.tolist()


def _sentence(cum, rng: np.random.Generator, n_words: int, comma_rate: float) -> str:
    chars: list[str] = []
    a, b = 0, 0
    words = 0
    draws = iter(rng.random(64 * n_words + 64).tolist())
    while True:
        u = next(draws, None)
        if u is None:
            u = float(rng.random())
        c = bisect.bisect_right(cum[a][b], u)
        c = min(c, len(ALPHABET) - 1)
        if c == 0:
            if b != 0:
                words += 1
                if words >= n_words:
                    break
                if rng.random() < comma_rate:
                    chars.append(",")
        if c != 0 or chars:
            chars.append(ALPHABET[c])
        a, b = b, c
    text = "".join(chars).strip()
    if not text:
        return _sentence(cum, rng, n_words, comma_rate)
    return text[0].upper() + text[1:] + "."


def generate_surrogate_corpus(seed: int = 0, n_sentences: int = 5000,
                              engines: tuple[str, ...] = ("engine_a",),
                              distinctness: float = 0.15, engine_noise: float = 0.1,
                              words: tuple[int, int] = (3, 20), comma_rate: float = 0.05,
                              concentration: float = 0.3, space_rate: float = 0.18,
                              letter_bias: float = 1.0) -> Corpus:
    """Build a :class:`Corpus` with all ten language labels.

    English goes to the ``original`` partition, the other nine languages to
    each requested engine.  Sentence lengths are uniform in ``words``.
    ``letter_bias`` scales a per-language letter preference applied to the
    private table, so single-letter frequencies differ between languages
    (averaging many random context rows alone leaves them nearly equal).
    """
    for e in engines:
        if e not in TRANSLATED_ENGINES:
            raise ValueError(f"unknown engine {e!r}")
    n = len(ALPHABET)
    base = _random_table(np.random.default_rng(derive_seed(seed, "surrogate", "base")), n, 1.0)
    cells: dict[tuple[str, str], tuple[Sentence, ...]] = {}
    for lang in LANGUAGES:
        lang_rng = np.random.default_rng(derive_seed(seed, "surrogate", lang))
        private = _random_table(lang_rng, n, concentration)
        if letter_bias:
            private *= (lang_rng.dirichlet(np.ones(n)) * n) ** letter_bias
            private /= private.sum(axis=2, keepdims=True)
        targets = [ORIGINAL] if lang == ENGLISH else list(engines)
        for engine in targets:
            table = (1 - distinctness) * base + distinctness * private
            if engine != ORIGINAL:
                noise = _random_table(np.random.default_rng(derive_seed(seed, "surrogate", engine, lang)),
                                      n, concentration)
                table = (1 - engine_noise) * table + engine_noise * noise
            cum = _cumulative(table, space_rate)
            rng = np.random.default_rng(derive_seed(seed, "surrogate", "text", engine, lang))
            lengths = rng.integers(words[0], words[1] + 1, size=n_sentences)
            sents = []
            for i, k in enumerate(lengths.tolist()):
                text = _sentence(cum, rng, k, comma_rate)
                sents.append(Sentence(i, text, word_count(text)))
            cells[(engine, lang)] = tuple(sents)
    return Corpus(cells)
