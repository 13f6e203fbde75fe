from .layers import (
    DenseLayer,
    EmbeddingLayer,
    LstmLayer,
    Param,
    clamp_events,
    cross_entropy,
    record_clamp_events,
    reset_clamp_events,
    softmax,
)
from .training import TrainConfig, TrainHistory, train_loop
from .optim import Adam
from .gradcheck import finite_difference_check, max_relative_error
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint, vocabulary_hash

__all__ = [
    "Adam",
    "CheckpointError",
    "DenseLayer",
    "EmbeddingLayer",
    "LstmLayer",
    "Param",
    "TrainConfig",
    "TrainHistory",
    "clamp_events",
    "cross_entropy",
    "record_clamp_events",
    "finite_difference_check",
    "load_checkpoint",
    "max_relative_error",
    "reset_clamp_events",
    "save_checkpoint",
    "softmax",
    "train_loop",
    "vocabulary_hash",
]
