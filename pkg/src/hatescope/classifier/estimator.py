"""Scikit-learn style front door for the multi-head classifier.

Wraps the functional training core in the familiar fit/predict surface
so the model drops into sklearn pipelines and model-selection tooling.
X is a sequence of raw comment strings; y is an (n, 5) array of level
codes, one column per target in canonical order.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..errors import EmptyInput
from ..labels import TARGETS, Comment, LabeledComment, LabelVector
from .features import DEFAULT_DIM, DEFAULT_SEED, extract_features
from .model import TrainConfig, forward, train

__all__ = ["HateSpeechClassifier", "validate_text_input", "validate_codes"]


def validate_text_input(X: Sequence[str]) -> list[str]:
    """Reject non-string or empty inputs before they hit the pipeline."""
    if isinstance(X, str):
        raise TypeError("X must be a sequence of strings, not a single string")
    texts = list(X)
    if not texts:
        raise EmptyInput("X must contain at least one text")
    for i, t in enumerate(texts):
        if not isinstance(t, str):
            raise TypeError(f"X[{i}] is {type(t).__name__}, expected str")
    return texts


def validate_codes(y, n_rows: int) -> np.ndarray:
    """Coerce y to an (n, 5) int array of level codes in 0..3."""
    if y is None:
        raise ValueError("y is required to fit the classifier")
    rows = []
    for item in y:
        if isinstance(item, LabelVector):
            rows.append(item.to_codes())
        else:
            rows.append([int(v) for v in item])
    arr = np.asarray(rows, dtype=np.int64)
    if arr.shape != (n_rows, len(TARGETS)):
        raise ValueError(
            f"y has shape {arr.shape}, expected ({n_rows}, {len(TARGETS)})"
        )
    if arr.min() < 0 or arr.max() > 3:
        raise ValueError("level codes must lie in 0..3")
    return arr


class HateSpeechClassifier(BaseEstimator):
    """Multi-target, multi-level text classifier with sklearn conventions.

    predict returns an (n, 5) array of level codes; predict_proba an
    (n, 5, 4) array of per-target simplexes; predict_labels the richer
    LabelVector objects.
    """

    def __init__(
        self,
        dim: int = DEFAULT_DIM,
        learning_rate: float = 0.05,
        momentum: float = 0.9,
        epochs: int = 10,
        batch_size: int = 32,
        l2: float = 1e-5,
        seed: int = DEFAULT_SEED,
    ):
        self.dim = dim
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.epochs = epochs
        self.batch_size = batch_size
        self.l2 = l2
        self.seed = seed

    def _config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            momentum=self.momentum,
            epochs=self.epochs,
            batch_size=self.batch_size,
            l2=self.l2,
            seed=self.seed,
            dim=self.dim,
        )

    def fit(self, X: Sequence[str], y) -> "HateSpeechClassifier":
        texts = validate_text_input(X)
        codes = validate_codes(y, len(texts))
        dataset = [
            LabeledComment(
                comment=Comment(id=str(i), text=text),
                labels=LabelVector.from_codes(row.tolist()),
            )
            for i, (text, row) in enumerate(zip(texts, codes))
        ]
        self.model_ = train(dataset, self._config())
        self.n_features_in_ = self.dim
        return self

    def predict_proba(self, X: Sequence[str]) -> np.ndarray:
        check_is_fitted(self, "model_")
        texts = validate_text_input(X)
        out = np.empty((len(texts), len(TARGETS), 4), dtype=np.float64)
        for i, text in enumerate(texts):
            x = extract_features(text, dim=self.model_.dim, seed=self.model_.seed)
            out[i] = forward(self.model_, x)
        return out

    def predict(self, X: Sequence[str]) -> np.ndarray:
        return self.predict_proba(X).argmax(axis=2)

    def predict_labels(self, X: Sequence[str]) -> list[LabelVector]:
        return [
            LabelVector.from_codes(row.tolist()) for row in self.predict(X)
        ]

    def score(self, X: Sequence[str], y) -> float:
        """Exact-match ratio of full label vectors (a strict score)."""
        texts = validate_text_input(X)
        codes = validate_codes(y, len(texts))
        predicted = self.predict(texts)
        return float(np.mean(np.all(predicted == codes, axis=1)))
