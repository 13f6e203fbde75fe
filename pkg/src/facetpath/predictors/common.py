"""Shared predictor types: path predictions, query encoders, features."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..embeddings import (
    EmbeddingTable,
    QueryVector,
    query_vector_s2pv,
    query_vector_word2vec,
    session_vector,
)
from ..taxonomy import NodeId

__all__ = [
    "PathPrediction",
    "QueryEncoder",
    "W2VQueryEncoder",
    "S2PVQueryEncoder",
    "ExternalQueryEncoder",
    "build_query_encoder",
    "normalize_query",
    "example_features",
]


def normalize_query(query: str) -> str:
    """Lowercase and collapse runs of whitespace."""
    return " ".join(query.lower().split())


@dataclass
class PathPrediction:
    """A generated node sequence with the distribution behind every node."""

    nodes: tuple[NodeId, ...]
    step_distributions: list[np.ndarray]
    step_gini: list[float]

    def __post_init__(self) -> None:
        if not (len(self.nodes) == len(self.step_distributions) == len(self.step_gini)):
            raise ValueError("nodes, distributions and gini scores must align")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(n.label for n in self.nodes)


class QueryEncoder:
    """Maps a raw query string to a fixed-size vector."""

    kind: str
    dim: int

    def encode(self, query: str) -> QueryVector:  # pragma: no cover - interface
        raise NotImplementedError


class W2VQueryEncoder(QueryEncoder):
    kind = "w2v"

    def __init__(self, token_table: EmbeddingTable):
        self.table = token_table
        self.dim = token_table.dim

    def encode(self, query: str) -> QueryVector:
        return query_vector_word2vec(query, self.table)


class S2PVQueryEncoder(QueryEncoder):
    kind = "s2pv"

    def __init__(self, unigram_table: EmbeddingTable):
        self.table = unigram_table
        self.dim = unigram_table.dim

    def encode(self, query: str) -> QueryVector:
        return query_vector_s2pv(query, self.table)


class ExternalQueryEncoder(QueryEncoder):
    """Whole-query lookup into an imported table (exact normalized match)."""

    kind = "external"

    def __init__(self, query_table: EmbeddingTable):
        self.table = query_table
        self.dim = query_table.dim

    def encode(self, query: str) -> QueryVector:
        vec = self.table.get(normalize_query(query))
        if vec is None:
            return QueryVector(values=np.zeros(self.dim), coverage=0.0)
        return QueryVector(values=vec, coverage=1.0)


def build_query_encoder(kind: str, table: EmbeddingTable) -> QueryEncoder:
    if kind == "w2v":
        return W2VQueryEncoder(table)
    if kind == "s2pv":
        return S2PVQueryEncoder(table)
    if kind == "external":
        return ExternalQueryEncoder(table)
    raise ValueError(f"unknown query encoder kind {kind!r}")


def example_features(
    query: str,
    session_products: tuple[str, ...] | list[str],
    query_encoder: QueryEncoder,
    session_table: EmbeddingTable,
    ablate_session: bool = False,
    session_vec: np.ndarray | None = None,
) -> np.ndarray:
    """Concatenate the query vector with the pooled session vector.

    Ablation keeps the input width fixed and zeroes the session half, so
    the same architecture trains with and without context. A precomputed
    ``session_vec`` is reused as-is, so batch callers pool the session
    once per request.
    """
    q = query_encoder.encode(query).values
    if ablate_session:
        s = np.zeros(session_table.dim)
    elif session_vec is not None:
        s = session_vec
    else:
        s = session_vector(session_products, session_table).values
    return np.concatenate([q, s])
