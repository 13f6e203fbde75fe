"""One-out-of-many full-path classifier over query + session features."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..decision import gini
from ..embeddings import EmbeddingTable
from ..eventlog import LabeledExample
from ..neuralcore import DenseLayer, TrainConfig, TrainHistory, train_loop
from ..neuralcore.checkpoint import load_checkpoint, save_checkpoint
from ..taxonomy import Path
from .common import PathPrediction, QueryEncoder, example_features

__all__ = ["MlpPredictor", "mlp_train", "mlp_predict"]

HIDDEN_WIDTH = 256


class _MlpDataset:
    def __init__(self, X: np.ndarray, y: np.ndarray):
        self.X = X
        self.y = y

    def __len__(self) -> int:
        return len(self.y)


class MlpNet:
    def __init__(self, in_dim: int, n_labels: int, hidden: int = HIDDEN_WIDTH, seed: int = 0):
        rng = np.random.default_rng(seed)
        self.hidden = DenseLayer(in_dim, hidden, "relu", rng=rng)
        self.out = DenseLayer(hidden, n_labels, "softmax", rng=rng)

    def params(self):
        return self.hidden.params() + self.out.params()

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        return self.out.forward(self.hidden.forward(x))

    def _ce(self, probs: np.ndarray, y: np.ndarray) -> float:
        pt = np.maximum(probs[np.arange(len(y)), y], 1e-12)
        return float(-np.log(pt).mean())

    def batch_loss(self, ds: _MlpDataset, idx: np.ndarray) -> float:
        return self._ce(self.predict_proba(ds.X[idx]), ds.y[idx])

    def batch_loss_and_grads(self, ds: _MlpDataset, idx: np.ndarray) -> float:
        X, y = ds.X[idx], ds.y[idx]
        probs = self.predict_proba(X)
        loss = self._ce(probs, y)
        grad_logits = probs.copy()
        grad_logits[np.arange(len(y)), y] -= 1.0
        grad_logits /= len(y)
        grad_hidden = self.out.backward_from_preactivation(grad_logits)
        self.hidden.backward(grad_hidden)
        return loss


@dataclass
class MlpPredictor:
    net: MlpNet
    labels: list[Path]
    query_encoder: QueryEncoder
    session_table: EmbeddingTable
    ablate_session: bool = False

    def predict(
        self,
        query: str,
        session_products: tuple[str, ...] | list[str],
        session_vec: np.ndarray | None = None,
    ) -> PathPrediction:
        return mlp_predict(self, query, session_products, session_vec)

    def save(self, path: str, vocab_hash: str) -> None:
        params = {
            "hidden.W": self.net.hidden.W.value,
            "hidden.b": self.net.hidden.b.value,
            "out.W": self.net.out.W.value,
            "out.b": self.net.out.b.value,
        }
        meta = {
            "labels": [list(p.labels) for p in self.labels],
            "in_dim": self.net.hidden.in_dim,
            "hidden": self.net.hidden.out_dim,
            "encoder_kind": self.query_encoder.kind,
            "ablate_session": self.ablate_session,
        }
        save_checkpoint(path, "mlp", params, meta, vocab_hash)

    @classmethod
    def load(
        cls,
        path: str,
        query_encoder: QueryEncoder,
        session_table: EmbeddingTable,
        vocab_hash: str | None = None,
    ) -> "MlpPredictor":
        payload = load_checkpoint(path, vocab_hash)
        meta = payload["meta"]
        net = MlpNet(meta["in_dim"], len(meta["labels"]), hidden=meta["hidden"])
        net.hidden.W.value[...] = payload["params"]["hidden.W"]
        net.hidden.b.value[...] = payload["params"]["hidden.b"]
        net.out.W.value[...] = payload["params"]["out.W"]
        net.out.b.value[...] = payload["params"]["out.b"]
        labels = [Path(tuple(ls)) for ls in meta["labels"]]
        return cls(net, labels, query_encoder, session_table, meta["ablate_session"])


def _features_matrix(
    examples: list[LabeledExample],
    query_encoder: QueryEncoder,
    session_table: EmbeddingTable,
    ablate_session: bool,
) -> np.ndarray:
    return np.stack(
        [
            example_features(ex.query, ex.session_products, query_encoder, session_table, ablate_session)
            for ex in examples
        ]
    )


def mlp_train(
    train_examples: list[LabeledExample],
    query_encoder: QueryEncoder,
    session_table: EmbeddingTable,
    config: TrainConfig,
    hidden: int = HIDDEN_WIDTH,
    ablate_session: bool = False,
) -> tuple[MlpPredictor, TrainHistory]:
    """Train a softmax classifier over every distinct full path in train.

    The label set is frozen at train time; validation is the
    chronologically last slice of the training examples.
    """
    if not train_examples:
        raise ValueError("cannot train on an empty example list")
    labels = sorted({ex.target_path.labels for ex in train_examples})
    label_index = {labels_t: i for i, labels_t in enumerate(labels)}
    X = _features_matrix(train_examples, query_encoder, session_table, ablate_session)
    y = np.array([label_index[ex.target_path.labels] for ex in train_examples])

    n_val = max(1, int(round(len(train_examples) * config.validation_fraction)))
    n_val = min(n_val, len(train_examples) - 1)
    train_ds = _MlpDataset(X[:-n_val], y[:-n_val])
    val_ds = _MlpDataset(X[-n_val:], y[-n_val:])

    net = MlpNet(X.shape[1], len(labels), hidden=hidden, seed=config.seed)
    history = train_loop(net, train_ds, val_ds, config)
    predictor = MlpPredictor(net, [Path(ls) for ls in labels], query_encoder, session_table, ablate_session)
    return predictor, history


def mlp_predict(
    predictor: MlpPredictor,
    query: str,
    session_products: tuple[str, ...] | list[str],
    session_vec: np.ndarray | None = None,
) -> PathPrediction:
    """Argmax full path, with its label distribution copied to every depth.

    The decision module treats each node of the winning path as gated by
    the same one-shot distribution.
    """
    x = example_features(
        query,
        session_products,
        predictor.query_encoder,
        predictor.session_table,
        predictor.ablate_session,
        session_vec=session_vec,
    )
    probs = predictor.net.predict_proba(x[None, :])[0]
    best = int(np.argmax(probs))
    path = predictor.labels[best]
    g = gini(probs)
    return PathPrediction(
        nodes=path.nodes,
        step_distributions=[probs] * path.depth,
        step_gini=[g] * path.depth,
    )
