"""Hashed sparse n-gram features over preprocessed text.

Character 1..4-grams and word unigrams/bigrams are hashed into a fixed
dimension with a keyed blake2b digest, so feature indices are stable
across processes and platforms for a given (dim, seed). Collisions are
accepted; counts that collide simply add. Vectors are L2-normalized.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from ..errors import DimensionError
from ..preprocess import preprocess_text, tokenize

__all__ = [
    "DEFAULT_DIM",
    "DEFAULT_SEED",
    "FeatureVector",
    "extract_features",
    "stable_feature_hash",
    "HashedNgramVectorizer",
]

DEFAULT_DIM = 2 ** 18
DEFAULT_SEED = 42

CHAR_NGRAM_RANGE = (1, 4)
WORD_NGRAM_RANGE = (1, 2)


def stable_feature_hash(key: str, dim: int, seed: int) -> int:
    """Deterministic bucket for a namespaced feature key."""
    digest = hashlib.blake2b(
        key.encode("utf-8"),
        digest_size=8,
        salt=seed.to_bytes(8, "little", signed=False),
    ).digest()
    return int.from_bytes(digest, "little") % dim


@dataclass(frozen=True)
class FeatureVector:
    """Sparse L2-normalized vector: parallel index/value arrays."""

    indices: np.ndarray  # int64, strictly increasing
    values: np.ndarray  # float64
    dim: int

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim, dtype=np.float64)
        out[self.indices] = self.values
        return out

    @property
    def nnz(self) -> int:
        return len(self.indices)


def _ngram_keys(text: str) -> Iterable[str]:
    lo, hi = CHAR_NGRAM_RANGE
    for n in range(lo, hi + 1):
        for i in range(len(text) - n + 1):
            yield "c:" + text[i : i + n]
    tokens = tokenize(text)
    lo, hi = WORD_NGRAM_RANGE
    for n in range(lo, hi + 1):
        for i in range(len(tokens) - n + 1):
            yield "w:" + " ".join(tokens[i : i + n])


def extract_features(
    raw_text: str,
    dim: int = DEFAULT_DIM,
    seed: int = DEFAULT_SEED,
    preprocessed: bool = False,
) -> FeatureVector:
    """Hash a comment into its sparse feature vector.

    Empty text after preprocessing yields the zero vector rather than
    an error, so downstream prediction still produces a (uniform-ish)
    distribution per head.
    """
    if dim <= 0:
        raise DimensionError(f"feature dimension must be positive, got {dim}")
    text = raw_text if preprocessed else preprocess_text(raw_text)
    counts: Counter[int] = Counter()
    for key in _ngram_keys(text):
        counts[stable_feature_hash(key, dim, seed)] += 1
    if not counts:
        return FeatureVector(
            indices=np.empty(0, dtype=np.int64),
            values=np.empty(0, dtype=np.float64),
            dim=dim,
        )
    indices = np.fromiter(sorted(counts), dtype=np.int64, count=len(counts))
    values = np.array([counts[i] for i in indices], dtype=np.float64)
    norm = float(np.sqrt(np.sum(values * values)))
    values /= norm
    return FeatureVector(indices=indices, values=values, dim=dim)


class HashedNgramVectorizer:
    """Stateless text-to-sparse-matrix transformer.

    Follows the fit/transform convention so it can sit in a pipeline;
    fit is a no-op because hashing needs no vocabulary pass.
    """

    def __init__(self, dim: int = DEFAULT_DIM, seed: int = DEFAULT_SEED):
        self.dim = dim
        self.seed = seed

    def get_params(self, deep: bool = True) -> dict:
        return {"dim": self.dim, "seed": self.seed}

    def set_params(self, **params) -> "HashedNgramVectorizer":
        for key, value in params.items():
            if not hasattr(self, key):
                raise ValueError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    def fit(self, X: Sequence[str], y: Optional[Sequence] = None):
        _ = self.transform_one(X[0]) if len(X) else None  # validate dim early
        return self

    def transform_one(self, text: str) -> FeatureVector:
        return extract_features(text, dim=self.dim, seed=self.seed)

    def transform(self, X: Sequence[str]) -> list[FeatureVector]:
        return [self.transform_one(t) for t in X]

    def fit_transform(self, X: Sequence[str], y: Optional[Sequence] = None):
        return self.fit(X, y).transform(X)
