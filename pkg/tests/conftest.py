import logging

import pytest

from mtsource.corpus import Corpus, Sentence, word_count
from mtsource.surrogate import generate_surrogate_corpus


def make_corpus(cells):
    """Corpus from {(engine, lang): [text, ...]}."""
    return Corpus({cell: tuple(Sentence(i, t, word_count(t)) for i, t in enumerate(texts))
                   for cell, texts in cells.items()})


@pytest.fixture(scope="session")
def small_surrogate():
    """Ten-language surrogate corpus, 400 sentences per cell."""
    return generate_surrogate_corpus(seed=7, n_sentences=400)


@pytest.fixture(scope="session")
def small_docset(small_surrogate):
    from mtsource.corpus import sample_documents
    logging.disable(logging.WARNING)
    try:
        return sample_documents(small_surrogate, "S", max_docs=30, seed=3)
    finally:
        logging.disable(logging.NOTSET)


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(criterion: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
