"""Session-aware facet-path prediction for e-commerce type-ahead.

The pipeline: ingest clickstream logs over a product taxonomy, train
product/query embeddings, train path predictors (count baseline, MLP
classifier, encoder-decoder generator), truncate generated paths with a
Gini-impurity confidence rule, evaluate by log replay, and serve
predictions behind an HTTP augmentation API.
"""

from .decision import DecisionConfig, decision_rule, gini, truncate_prediction
from .embeddings import (
    EmbeddingTable,
    QueryVector,
    SessionVector,
    build_search2prod2vec,
    query_vector_s2pv,
    query_vector_word2vec,
    session_vector,
    train_skipgram,
)
from .eventlog import (
    DatasetSplit,
    LabeledExample,
    SessionEvent,
    build_examples,
    chronological_split,
    ingest,
    session_view_sequences,
)
from .evalharness import (
    EvalReport,
    SearchEventGroup,
    SimResult,
    SuiteConfig,
    SweepRow,
    accuracy_at_depth,
    group_events,
    run_experiment_suite,
    simulate_event,
    sweep_thresholds,
)
from .neuralcore import TrainConfig, TrainHistory
from .predictors import (
    CountModel,
    MlpPredictor,
    PathPrediction,
    SessionPathPredictor,
    cm_predict,
    cm_train,
    mlp_train,
    normalize_query,
    sp_train,
)
from .synthetic import SynthConfig, generate_synthetic
from .taxonomy import NodeId, Path, TaxonomyTree, load_catalog, node_vocabulary

__version__ = "0.1.0"

__all__ = [
    "CountModel",
    "DatasetSplit",
    "DecisionConfig",
    "EmbeddingTable",
    "EvalReport",
    "LabeledExample",
    "MlpPredictor",
    "NodeId",
    "Path",
    "PathPrediction",
    "QueryVector",
    "SearchEventGroup",
    "SessionEvent",
    "SessionPathPredictor",
    "SessionVector",
    "SimResult",
    "SuiteConfig",
    "SweepRow",
    "SynthConfig",
    "TaxonomyTree",
    "TrainConfig",
    "TrainHistory",
    "accuracy_at_depth",
    "build_examples",
    "build_search2prod2vec",
    "chronological_split",
    "cm_predict",
    "cm_train",
    "decision_rule",
    "generate_synthetic",
    "gini",
    "group_events",
    "ingest",
    "load_catalog",
    "mlp_train",
    "node_vocabulary",
    "normalize_query",
    "query_vector_s2pv",
    "query_vector_word2vec",
    "run_experiment_suite",
    "session_vector",
    "session_view_sequences",
    "simulate_event",
    "sp_train",
    "sweep_thresholds",
    "train_skipgram",
    "truncate_prediction",
    "__version__",
]
