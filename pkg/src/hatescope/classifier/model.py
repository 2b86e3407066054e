"""Five-head linear softmax classifier over hashed features.

Head t scores the four hatred levels for target t as softmax(W_t x + b_t)
with a shared sparse input x. The training objective is the mean over
examples of the summed per-head cross-entropy plus an L2 penalty on the
weights, which is convex, so minibatch SGD with momentum needs no
restarts. All randomness flows from the config seed.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import (
    DimensionError,
    DivergenceError,
    EmptyInput,
    ModelFormatError,
)
from ..labels import (
    TARGETS,
    Comment,
    LabeledComment,
    LabelVector,
    Target,
)
from .features import DEFAULT_DIM, DEFAULT_SEED, FeatureVector, extract_features

__all__ = [
    "N_HEADS",
    "N_LEVELS",
    "TrainConfig",
    "MultiHeadLinearModel",
    "PredictionOutput",
    "forward",
    "loss_and_grad",
    "train",
    "predict_labels",
    "save_model",
    "load_model",
]

N_HEADS = 5
N_LEVELS = 4

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    momentum: float = 0.9
    epochs: int = 10
    batch_size: int = 32
    l2: float = 1e-5
    seed: int = DEFAULT_SEED
    dim: int = DEFAULT_DIM

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning rate must be positive, got {self.learning_rate}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be at least 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be at least 1, got {self.batch_size}")
        # 0 switches the mechanism off; negatives are always a bug.
        if self.momentum < 0:
            raise ValueError(f"momentum must be non-negative, got {self.momentum}")
        if self.l2 < 0:
            raise ValueError(f"L2 penalty must be non-negative, got {self.l2}")
        if self.dim < 1:
            raise DimensionError(f"feature dimension must be positive, got {self.dim}")


@dataclass
class MultiHeadLinearModel:
    """Weights (5, 4, D) and biases (5, 4); treat as immutable once trained."""

    weights: np.ndarray
    biases: np.ndarray
    dim: int
    seed: int
    epochs_trained: int = 0
    loss_curve: list[float] = field(default_factory=list)

    @staticmethod
    def zeros(dim: int = DEFAULT_DIM, seed: int = DEFAULT_SEED) -> "MultiHeadLinearModel":
        return MultiHeadLinearModel(
            weights=np.zeros((N_HEADS, N_LEVELS, dim), dtype=np.float64),
            biases=np.zeros((N_HEADS, N_LEVELS), dtype=np.float64),
            dim=dim,
            seed=seed,
        )

    def __post_init__(self):
        if self.weights.shape != (N_HEADS, N_LEVELS, self.dim):
            raise DimensionError(
                f"weights shape {self.weights.shape}, "
                f"expected {(N_HEADS, N_LEVELS, self.dim)}"
            )
        if self.biases.shape != (N_HEADS, N_LEVELS):
            raise DimensionError(
                f"biases shape {self.biases.shape}, expected {(N_HEADS, N_LEVELS)}"
            )

    @property
    def model_id(self) -> str:
        digest = hashlib.blake2b(digest_size=6)
        digest.update(np.ascontiguousarray(self.weights).tobytes())
        digest.update(np.ascontiguousarray(self.biases).tobytes())
        return "mhl-" + digest.hexdigest()


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def forward(model: MultiHeadLinearModel, x: FeatureVector) -> np.ndarray:
    """Per-head probability simplexes, shape (5, 4)."""
    if x.dim != model.dim:
        raise DimensionError(
            f"feature dimension {x.dim} does not match model dimension {model.dim}"
        )
    if x.nnz:
        logits = model.weights[:, :, x.indices] @ x.values + model.biases
    else:
        logits = model.biases.copy()
    return _softmax_rows(logits)


def _gold_codes(example: LabeledComment) -> np.ndarray:
    return np.array(example.labels.to_codes(), dtype=np.int64)


def loss_and_grad(
    model: MultiHeadLinearModel,
    batch: Sequence[LabeledComment],
    l2: float = 0.0,
    features: Optional[Sequence[FeatureVector]] = None,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Objective value plus exact gradients d/dW (5,4,D) and d/db (5,4).

    Pass precomputed ``features`` aligned with ``batch`` to skip hashing.
    """
    if not batch:
        raise EmptyInput("loss needs a non-empty batch")
    if features is None:
        features = [extract_features(ex.comment.text) for ex in batch]
    n = len(batch)
    grad_w = np.zeros_like(model.weights)
    grad_b = np.zeros_like(model.biases)
    total = 0.0
    for ex, x in zip(batch, features):
        probs = forward(model, x)
        gold = _gold_codes(ex)
        total += -np.log(probs[np.arange(N_HEADS), gold]).sum()
        delta = probs
        delta[np.arange(N_HEADS), gold] -= 1.0
        grad_b += delta
        if x.nnz:
            grad_w[:, :, x.indices] += delta[:, :, None] * x.values[None, None, :]
    loss = total / n + 0.5 * l2 * float(np.sum(model.weights * model.weights))
    grad_w /= n
    grad_b /= n
    if l2:
        grad_w += l2 * model.weights
    return loss, grad_w, grad_b


def dataset_loss(
    model: MultiHeadLinearModel,
    features: Sequence[FeatureVector],
    golds: Sequence[np.ndarray],
    l2: float,
) -> float:
    """Full-dataset objective without materializing gradients."""
    total = 0.0
    for x, gold in zip(features, golds):
        probs = forward(model, x)
        total += -np.log(probs[np.arange(N_HEADS), gold]).sum()
    return total / len(features) + 0.5 * l2 * float(
        np.sum(model.weights * model.weights)
    )


def train(
    dataset: Sequence[LabeledComment],
    config: TrainConfig = TrainConfig(),
    features: Optional[Sequence[FeatureVector]] = None,
) -> MultiHeadLinearModel:
    """Minibatch SGD with momentum; loss curve holds the per-epoch objective.

    Entry 0 of the curve is the untrained objective, so curve[-1] <=
    curve[0] certifies descent. Raises DivergenceError naming the
    offending step if the objective stops being finite.
    """
    if not dataset:
        raise EmptyInput("training needs a non-empty dataset")
    if features is None:
        features = [
            extract_features(ex.comment.text, dim=config.dim, seed=config.seed)
            for ex in dataset
        ]
    golds = [_gold_codes(ex) for ex in dataset]
    model = MultiHeadLinearModel.zeros(dim=config.dim, seed=config.seed)
    vel_w = np.zeros_like(model.weights)
    vel_b = np.zeros_like(model.biases)
    rng = np.random.default_rng(config.seed)
    n = len(dataset)
    lr = config.learning_rate
    model.loss_curve.append(dataset_loss(model, features, golds, config.l2))
    step = 0
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch_idx = order[start : start + config.batch_size]
            b = len(batch_idx)
            step += 1
            # Sparse data gradient folded straight into the velocity;
            # only the L2 term and the parameter update touch all of W.
            vel_w *= config.momentum
            vel_b *= config.momentum
            if config.l2:
                vel_w -= lr * config.l2 * model.weights
            batch_loss = 0.0
            for i in batch_idx:
                x = features[i]
                gold = golds[i]
                probs = forward(model, x)
                batch_loss += -np.log(probs[np.arange(N_HEADS), gold]).sum()
                delta = probs
                delta[np.arange(N_HEADS), gold] -= 1.0
                scale = lr / b
                vel_b -= scale * delta
                if x.nnz:
                    vel_w[:, :, x.indices] -= scale * (
                        delta[:, :, None] * x.values[None, None, :]
                    )
            if not np.isfinite(batch_loss):
                raise DivergenceError(step, f"non-finite loss at step {step}")
            model.weights += vel_w
            model.biases += vel_b
        epoch_loss = dataset_loss(model, features, golds, config.l2)
        if not np.isfinite(epoch_loss):
            raise DivergenceError(step, f"non-finite loss after epoch {epoch + 1}")
        model.loss_curve.append(epoch_loss)
    model.epochs_trained = config.epochs
    return model


@dataclass(frozen=True)
class PredictionOutput:
    comment_id: str
    probabilities: dict[Target, tuple[float, float, float, float]]
    labels: LabelVector
    model_id: str
    latency_ms: float


def predict_labels(model: MultiHeadLinearModel, comment: Comment) -> PredictionOutput:
    """Decode one comment: argmax per head, ties toward the lowest code."""
    started = time.perf_counter()
    x = extract_features(comment.text, dim=model.dim, seed=model.seed)
    probs = forward(model, x)
    codes = probs.argmax(axis=1)  # ties resolve to the first (lowest) index
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    return PredictionOutput(
        comment_id=comment.id,
        probabilities={
            t: tuple(float(v) for v in probs[t.index]) for t in TARGETS
        },
        labels=LabelVector.from_codes(codes.tolist()),
        model_id=model.model_id,
        latency_ms=elapsed_ms,
    )


# -- persistence -------------------------------------------------------------


def save_model(model: MultiHeadLinearModel, path: str) -> None:
    """Write the versioned npz bundle with a JSON header."""
    header = {
        "format_version": MODEL_FORMAT_VERSION,
        "dim": model.dim,
        "seed": model.seed,
        "head_shapes": [[N_LEVELS, model.dim]] * N_HEADS,
        "epochs_trained": model.epochs_trained,
        "loss_curve": model.loss_curve,
    }
    # numpy appends .npz to bare string paths; an open handle keeps the
    # bundle at exactly the path the caller asked for.
    with open(path, "wb") as fh:
        np.savez_compressed(
            fh,
            header=np.frombuffer(
                json.dumps(header).encode("utf-8"), dtype=np.uint8
            ),
            weights=model.weights,
            biases=model.biases,
        )


def load_model(path: str) -> MultiHeadLinearModel:
    """Read a model bundle, validating version and parameter shapes."""
    try:
        with np.load(path) as bundle:
            raw_header = bytes(bundle["header"].tobytes())
            weights = bundle["weights"]
            biases = bundle["biases"]
    except (OSError, KeyError, ValueError) as exc:
        raise ModelFormatError(f"unreadable model file {path}: {exc}") from exc
    try:
        header = json.loads(raw_header.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"corrupt model header in {path}") from exc
    if header.get("format_version") != MODEL_FORMAT_VERSION:
        raise ModelFormatError(
            f"unsupported model format {header.get('format_version')!r}"
        )
    dim = header.get("dim")
    expected_heads = [[N_LEVELS, dim]] * N_HEADS
    if header.get("head_shapes") != expected_heads:
        raise ModelFormatError(f"unexpected head shapes {header.get('head_shapes')}")
    if weights.shape != (N_HEADS, N_LEVELS, dim) or biases.shape != (N_HEADS, N_LEVELS):
        raise ModelFormatError(
            f"parameter shapes {weights.shape}/{biases.shape} do not match header"
        )
    model = MultiHeadLinearModel(
        weights=weights,
        biases=biases,
        dim=dim,
        seed=int(header.get("seed", DEFAULT_SEED)),
        epochs_trained=int(header.get("epochs_trained", 0)),
        loss_curve=[float(v) for v in header.get("loss_curve", [])],
    )
    return model
