from .common import (
    ExternalQueryEncoder,
    PathPrediction,
    QueryEncoder,
    S2PVQueryEncoder,
    W2VQueryEncoder,
    build_query_encoder,
    example_features,
    normalize_query,
)
from .count_model import DEFAULT_SHARE_THRESHOLD, CountModel, cm_predict, cm_train
from .mlp import MlpPredictor, mlp_predict, mlp_train
from .sessionpath import SessionPathModel, SessionPathPredictor, sp_generate, sp_train

__all__ = [
    "CountModel",
    "DEFAULT_SHARE_THRESHOLD",
    "ExternalQueryEncoder",
    "MlpPredictor",
    "PathPrediction",
    "QueryEncoder",
    "S2PVQueryEncoder",
    "SessionPathModel",
    "SessionPathPredictor",
    "W2VQueryEncoder",
    "build_query_encoder",
    "cm_predict",
    "cm_train",
    "example_features",
    "mlp_predict",
    "mlp_train",
    "normalize_query",
    "sp_generate",
    "sp_train",
]
