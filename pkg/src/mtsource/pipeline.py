"""Trained feature pipeline plus classifier, persisted as one text model file."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import serialize
from .classifier import TrainConfig, model_from_dict, train_classifier
from .corpus import ENGLISH
from .features import (FittedFeatures, IdfWeights, Vocabulary, default_punctuation, feature_spec,
                       featurize, stop_words)
from .postagger import TaggerModel

MODEL_FORMAT = "mtsource-model"
MODEL_VERSION = 1

UNTRANSLATED_VERDICT = "no translation detected (original English)"


class ModelFileError(ValueError):
    pass


def verdict(label: str) -> str:
    if label == ENGLISH:
        return UNTRANSLATED_VERDICT
    return f"machine-translated from {label}"


@dataclass
class TrainedModel:
    features: list[FittedFeatures]
    classifier: object  # LinearModel | NBModel | KNNModel

    @property
    def classes(self) -> tuple[str, ...]:
        return self.classifier.classes

    def featurize(self, documents: Sequence) -> sp.csr_matrix:
        blocks = [featurize(documents, f.spec, f)[0] for f in self.features]
        return blocks[0] if len(blocks) == 1 else sp.hstack(blocks, format="csr")

    def decision_scores(self, documents: Sequence) -> np.ndarray:
        return self.classifier.decision_scores(self.featurize(documents))

    def predict(self, documents: Sequence) -> list[str]:
        return self.classifier.predict(self.featurize(documents))

    def to_dict(self) -> dict:
        blocks = []
        for f in self.features:
            blocks.append({
                "feature_id": f.spec.feature_id,
                "analyzer": f.spec.analyzer,
                "n_range": list(f.spec.n_range) if f.spec.n_range else None,
                "tfidf": f.spec.tfidf,
                "lowercase": f.spec.lowercase,
                "vocabulary": list(f.vocab.terms),
                "idf": None if f.idf is None else {"n_docs": f.idf.n_docs, "values": f.idf.idf.tolist()},
                "tagger": None if f.tagger is None else f.tagger.to_dict(),
            })
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "preprocessing": {
                "collapse_whitespace": True,
                "word_tokens": "whitespace",
                "punctuation": sorted(default_punctuation()),
                "stopwords": sorted(stop_words()),
            },
            "features": blocks,
            "classifier": self.classifier.to_dict(),
        }

    def dumps(self) -> str:
        return serialize.dumps(self.to_dict())

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.dumps())

    @classmethod
    def from_dict(cls, data: dict) -> "TrainedModel":
        if data.get("format") != MODEL_FORMAT:
            raise ModelFileError("not a model file")
        if data.get("version") != MODEL_VERSION:
            raise ModelFileError(f"unsupported model version {data.get('version')!r}")
        fitted = []
        for block in data["features"]:
            spec = feature_spec(block["feature_id"], block["lowercase"])
            idf = None
            if block["idf"] is not None:
                idf = IdfWeights(np.asarray(block["idf"]["values"], dtype=np.float64), int(block["idf"]["n_docs"]))
            tagger = None if block["tagger"] is None else TaggerModel.from_dict(block["tagger"])
            fitted.append(FittedFeatures(spec, Vocabulary(block["vocabulary"]), idf, tagger))
        return cls(fitted, model_from_dict(data["classifier"]))

    @classmethod
    def load(cls, path: str | Path) -> "TrainedModel":
        try:
            data = serialize.loads(Path(path).read_text(encoding="utf-8"))
        except ValueError as exc:
            raise ModelFileError(f"{path}: not valid JSON ({exc})") from None
        return cls.from_dict(data)


def train_model(documents: Sequence, labels: Sequence[str], feature_ids: Sequence[int] | int = 13,
                classifier: str = "svm", config: TrainConfig | None = None,
                tagger: TaggerModel | None = None, jobs: int = 1, **options) -> TrainedModel:
    """Fit features on ``documents`` and train the named classifier."""
    if isinstance(feature_ids, (int, np.integer)):
        feature_ids = [feature_ids]
    fitted, blocks = [], []
    for fid in feature_ids:
        X, f = featurize(documents, feature_spec(fid), None, tagger)
        fitted.append(f)
        blocks.append(X)
    X = blocks[0] if len(blocks) == 1 else sp.hstack(blocks, format="csr")
    model = train_classifier(classifier, X, list(labels), config, jobs=jobs, **options)
    return TrainedModel(fitted, model)
