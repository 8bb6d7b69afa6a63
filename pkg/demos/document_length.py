"""
Accuracy versus document length
===============================

Ten synthetic "languages" (character Markov chains sharing most of their
statistics) stand in for machine-translated English.  Longer documents
carry more evidence, so the linear SVM on tf-idf character 1-4-grams
(feature id 13) should climb from near chance to near perfect.
"""

import logging

from mtsource.corpus import sample_documents
from mtsource.experiments import length_experiment
from mtsource.surrogate import generate_surrogate_corpus

logging.disable(logging.WARNING)

# 1,500 sentences per language keeps this under a minute or two
corpus = generate_surrogate_corpus(seed=0, n_sentences=1500)
print(corpus.counts()[("engine_a", "de")], "sentences per cell")

sets = {size: sample_documents(corpus, size, 300, seed=0) for size in ("S", "M", "L")}
for size, ds in sets.items():
    print(size, len(ds), "documents")

report = length_experiment(sets, ("S", "M", "L"), features=[13], seed=0)
print(report.to_csv())

# rows of the confusion matrix are true languages, columns predictions
print(report.confusions[("engine_a", "13", "S")].to_csv())
