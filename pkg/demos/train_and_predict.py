"""
Train once, predict anywhere
============================

A trained model (vocabulary, idf table, SVM weights) is one JSON file.
Predicting "en" means the text looks untranslated.
"""

import logging
import tempfile
from pathlib import Path

from mtsource.corpus import sample_documents
from mtsource.pipeline import TrainedModel, train_model, verdict
from mtsource.surrogate import generate_surrogate_corpus

logging.disable(logging.WARNING)

corpus = generate_surrogate_corpus(seed=2, n_sentences=3000)
docs = sample_documents(corpus, "L", 40, seed=2).documents
train = [d for i, d in enumerate(docs) if i % 4]
held_out = [d for i, d in enumerate(docs) if i % 4 == 0]
model = train_model(train, [d.language for d in train], feature_ids=[13])

path = Path(tempfile.mkdtemp()) / "model.json"
model.save(path)
print(f"model file: {path} ({path.stat().st_size // 1024} KiB)")

loaded = TrainedModel.load(path)
predicted = loaded.predict(held_out)
hits = sum(p == d.language for p, d in zip(predicted, held_out))
print(f"held-out accuracy {hits}/{len(held_out)}")
for doc, label in list(zip(held_out, predicted))[::10]:
    print(f"true {doc.language}  predicted {label:>2}  -> {verdict(label)}")
