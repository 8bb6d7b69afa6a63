"""Source-language prediction for machine-translated English text.

Character, word, punctuation and part-of-speech n-gram features, a linear
SVM trained by dual coordinate descent, and a cross-validation harness for
sweeps over document length, candidate languages and feature sets.
"""

__version__ = "0.1.0"

from .classifier import TrainConfig, train_classifier, train_linear_svm
from .corpus import DocumentSet, load_corpus, sample_documents, split_folds
from .experiments import (ConfusionMatrix, cross_validate, feature_combination_sweep,
                          language_subset_experiment, length_experiment, single_feature_sweep)
from .features import extract_char_ngrams, feature_spec, featurize, fit_idf, transform
from .pipeline import TrainedModel, train_model
from .postagger import default_tagger, train_tagger

__all__ = [
    "ConfusionMatrix", "DocumentSet", "TrainConfig", "TrainedModel", "cross_validate",
    "default_tagger", "extract_char_ngrams", "feature_combination_sweep", "feature_spec",
    "featurize", "fit_idf", "language_subset_experiment", "length_experiment", "load_corpus",
    "sample_documents", "single_feature_sweep", "split_folds", "train_classifier",
    "train_linear_svm", "train_model", "train_tagger", "transform",
]
