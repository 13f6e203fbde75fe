"""Skip-gram embeddings and the session/query encoders built on them.

Three tables are trained from the logs and the catalog:

* product vectors from session view sequences (skip-gram over co-views);
* description-token vectors from catalog text (skip-gram over tokens);
* query-unigram vectors derived from clicks: each training query is the
  click-weighted average of the product vectors it led to, and each token
  is the click-weighted average of the queries containing it. Composition
  by average pooling then covers queries never seen verbatim.

All pooling is a plain arithmetic mean, so session and query vectors are
invariant to input order, and unknown symbols are skipped (an all-unknown
input yields the zero vector, never an error).
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .eventlog import LabeledExample

__all__ = [
    "EmbeddingTable",
    "SessionVector",
    "QueryVector",
    "tokenize",
    "train_skipgram",
    "session_vector",
    "query_vector_word2vec",
    "build_search2prod2vec",
    "query_vector_s2pv",
    "import_external_query_embeddings",
]

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on whitespace/punctuation. No stemming."""
    return _TOKEN_RE.findall(text.lower())


@dataclass
class EmbeddingTable:
    dim: int
    kind: str  # product | token | query_unigram | query
    vectors: dict[str, np.ndarray] = field(default_factory=dict)

    def __contains__(self, key: str) -> bool:
        return key in self.vectors

    def __getitem__(self, key: str) -> np.ndarray:
        return self.vectors[key]

    def get(self, key: str) -> np.ndarray | None:
        return self.vectors.get(key)

    def __len__(self) -> int:
        return len(self.vectors)

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"dim={self.dim} kind={self.kind}\n")
            for key in sorted(self.vectors):
                values = " ".join(f"{v:.17g}" for v in self.vectors[key])
                fh.write(f"{key}\t{values}\n")

    @classmethod
    def load(cls, path: str) -> "EmbeddingTable":
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip()
            m = re.fullmatch(r"dim=(\d+) kind=(\w+)", header)
            if not m:
                raise ValueError(f"bad embedding file header: {header!r}")
            dim, kind = int(m.group(1)), m.group(2)
            vectors: dict[str, np.ndarray] = {}
            for lineno, line in enumerate(fh, start=2):
                line = line.rstrip("\n")
                if not line:
                    continue
                key, _, values = line.partition("\t")
                vec = np.array([float(v) for v in values.split()])
                if vec.size != dim:
                    raise ValueError(f"line {lineno}: expected {dim} values, got {vec.size}")
                vectors[key] = vec
        return cls(dim=dim, kind=kind, vectors=vectors)


@dataclass(frozen=True)
class SessionVector:
    values: np.ndarray
    is_empty_session: bool


@dataclass(frozen=True)
class QueryVector:
    values: np.ndarray
    coverage: float


def train_skipgram(
    corpus: list[list[str]],
    dim: int = 50,
    window: int = 5,
    negatives: int = 5,
    epochs: int = 10,
    seed: int = 0,
    min_count: int = 1,
    kind: str = "product",
    lr: float = 0.025,
    min_lr: float = 1e-4,
) -> EmbeddingTable:
    """Skip-gram with negative sampling, single-threaded and seed-stable.

    The context window shrinks randomly per position (standard trick), the
    noise distribution is unigram frequency raised to 0.75, and the learning
    rate decays linearly over all scheduled updates.
    """
    if not corpus:
        raise ValueError("empty corpus")
    if dim < 2:
        raise ValueError(f"dim must be >= 2, got {dim}")
    counts = Counter(sym for seq in corpus for sym in seq)
    vocab = sorted((s for s, c in counts.items() if c >= min_count), key=lambda s: (-counts[s], s))
    if not vocab:
        raise ValueError(f"empty vocabulary after min_count={min_count}")
    index = {s: i for i, s in enumerate(vocab)}
    V = len(vocab)

    rng = np.random.default_rng(seed)
    U = (rng.random((V, dim)) - 0.5) / dim  # input vectors, word2vec-style init
    W = np.zeros((V, dim))  # output (context) vectors

    noise = np.array([counts[s] for s in vocab], dtype=np.float64) ** 0.75
    noise_cdf = np.cumsum(noise / noise.sum())

    sequences = [[index[s] for s in seq if s in index] for seq in corpus]
    total_positions = sum(len(seq) for seq in sequences) * epochs
    done = 0
    for _ in range(epochs):
        for seq in sequences:
            n = len(seq)
            for i in range(n):
                done += 1
                if n < 2:
                    continue
                alpha = max(min_lr, lr * (1.0 - done / max(total_positions, 1)))
                b = int(rng.integers(1, window + 1))
                center = seq[i]
                lo, hi = max(0, i - b), min(n, i + b + 1)
                u = U[center]
                for j in range(lo, hi):
                    if j == i:
                        continue
                    ctx = seq[j]
                    neg = np.searchsorted(noise_cdf, rng.random(negatives))
                    targets = np.concatenate(([ctx], neg[neg != ctx]))
                    labels = np.zeros(len(targets))
                    labels[0] = 1.0
                    Wt = W[targets]
                    scores = 1.0 / (1.0 + np.exp(-(Wt @ u)))
                    g = (labels - scores) * alpha
                    grad_u = g @ Wt
                    W[targets] += np.outer(g, u)
                    u += grad_u
    vectors = {s: U[index[s]].copy() for s in vocab}
    return EmbeddingTable(dim=dim, kind=kind, vectors=vectors)


def _mean_of_known(keys: list[str], table: EmbeddingTable) -> tuple[np.ndarray, int]:
    acc = np.zeros(table.dim)
    known = 0
    for key in keys:
        vec = table.get(key)
        if vec is not None:
            acc += vec
            known += 1
    if known:
        acc /= known
    return acc, known


def session_vector(session_products: list[str] | tuple[str, ...], table: EmbeddingTable) -> SessionVector:
    """Average pool the embeddings of in-vocabulary session products."""
    values, known = _mean_of_known(list(session_products), table)
    return SessionVector(values=values, is_empty_session=known == 0)


def query_vector_word2vec(query: str, token_table: EmbeddingTable) -> QueryVector:
    """Average pool description-token embeddings over the tokenized query."""
    tokens = tokenize(query)
    values, known = _mean_of_known(tokens, token_table)
    coverage = known / len(tokens) if tokens else 0.0
    return QueryVector(values=values, coverage=coverage)


def build_search2prod2vec(
    train_examples: list[LabeledExample],
    product_table: EmbeddingTable,
    weighted_unigrams: bool = True,
) -> EmbeddingTable:
    """Click-derived query-unigram table.

    Step 1 embeds every distinct training query as the click-count-weighted
    average of the product vectors it led to. Step 2 embeds each token as
    the click-count-weighted average of the step-1 vectors of queries
    containing it (``weighted_unigrams=False`` switches to a plain mean).
    Queries whose clicked products are all out of vocabulary are omitted.
    """
    # one example == one click on its clicked_product
    click_weight: dict[str, Counter] = {}
    for ex in train_examples:
        click_weight.setdefault(ex.query, Counter())[ex.clicked_product] += 1

    query_vec: dict[str, np.ndarray] = {}
    query_mass: dict[str, float] = {}
    for query in sorted(click_weight):
        acc = np.zeros(product_table.dim)
        mass = 0.0
        for pid, w in click_weight[query].items():
            vec = product_table.get(pid)
            if vec is not None:
                acc += w * vec
                mass += w
        if mass > 0:
            query_vec[query] = acc / mass
            query_mass[query] = mass

    token_acc: dict[str, np.ndarray] = {}
    token_mass: dict[str, float] = {}
    for query, vec in query_vec.items():
        w = query_mass[query] if weighted_unigrams else 1.0
        for token in dict.fromkeys(tokenize(query)):
            if token not in token_acc:
                token_acc[token] = np.zeros(product_table.dim)
                token_mass[token] = 0.0
            token_acc[token] += w * vec
            token_mass[token] += w
    vectors = {t: token_acc[t] / token_mass[t] for t in sorted(token_acc)}
    return EmbeddingTable(dim=product_table.dim, kind="query_unigram", vectors=vectors)


def query_vector_s2pv(query: str, unigram_table: EmbeddingTable) -> QueryVector:
    """Compose a query from its unigram vectors by average pooling."""
    tokens = tokenize(query)
    values, known = _mean_of_known(tokens, unigram_table)
    coverage = known / len(tokens) if tokens else 0.0
    return QueryVector(values=values, coverage=coverage)


def import_external_query_embeddings(path: str) -> EmbeddingTable:
    """Load whole-query vectors produced by an external encoder.

    Same text format as the native tables; any dimension is accepted and
    model input widths adapt to it.
    """
    table = EmbeddingTable.load(path)
    if not table.vectors:
        raise ValueError(f"no vectors in {path}")
    table.kind = "query"
    return table
