"""
Fewer candidate languages, easier decisions
===========================================

Restricting the candidates to English plus one other language turns the
task into binary detection.  Every subset of size m contains English, so
m=2 has nine subsets and m=10 a single one.
"""

import logging

import numpy as np

from mtsource.corpus import sample_documents
from mtsource.experiments import language_subset_experiment
from mtsource.surrogate import generate_surrogate_corpus

logging.disable(logging.WARNING)

corpus = generate_surrogate_corpus(seed=1, n_sentences=800)
short = sample_documents(corpus, "S", 80, seed=1)

report = language_subset_experiment(short, subset_sizes=(2, 3, 10), features=[13], seed=1)

for row in report.rows:
    if ":" not in row.xaxis:
        print(f"m={row.xaxis:>2}  mean accuracy {row.accuracy:.3f}  baseline {row.baseline:.3f}")

pairs = [(r.xaxis.split(":")[1], r.accuracy) for r in report.rows if r.xaxis.startswith("2:")]
hardest = min(pairs, key=lambda p: p[1])
print("hardest pair:", hardest[0], round(hardest[1], 3))
print("spread over pairs:", np.ptp([a for _, a in pairs]).round(3))
