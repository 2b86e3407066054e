"""Feature hashing, the multi-head linear model, and inference clients."""

from .estimator import HateSpeechClassifier
from .features import (
    DEFAULT_DIM,
    DEFAULT_SEED,
    FeatureVector,
    HashedNgramVectorizer,
    extract_features,
    stable_feature_hash,
)
from .model import (
    MultiHeadLinearModel,
    PredictionOutput,
    TrainConfig,
    forward,
    load_model,
    loss_and_grad,
    predict_labels,
    save_model,
    train,
)
from .remote import remote_predict

__all__ = [
    "DEFAULT_DIM",
    "DEFAULT_SEED",
    "FeatureVector",
    "HashedNgramVectorizer",
    "extract_features",
    "stable_feature_hash",
    "MultiHeadLinearModel",
    "PredictionOutput",
    "TrainConfig",
    "forward",
    "load_model",
    "loss_and_grad",
    "predict_labels",
    "save_model",
    "train",
    "remote_predict",
    "HateSpeechClassifier",
]
