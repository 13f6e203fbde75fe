"""Encoder-decoder path generator conditioned on query and session.

The encoder compresses concat(query vector, session vector) through a
tanh layer, then two linear heads seed the decoder LSTM's initial hidden
and cell states. The decoder emits taxonomy nodes one depth at a time:
token embedding, a single LSTM layer, a tanh layer, and a softmax over
the node vocabulary. Training uses teacher forcing with per-example
summed cross-entropy; inference is greedy and stops at the end token.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..decision import gini
from ..embeddings import EmbeddingTable
from ..eventlog import LabeledExample
from ..neuralcore import (
    DenseLayer,
    EmbeddingLayer,
    LstmLayer,
    TrainConfig,
    TrainHistory,
    record_clamp_events,
    train_loop,
)
from ..neuralcore.checkpoint import load_checkpoint, save_checkpoint, vocabulary_hash
from ..taxonomy import END, START, NodeId
from .common import PathPrediction, QueryEncoder, example_features

__all__ = ["SessionPathModel", "SessionPathPredictor", "sp_train", "sp_generate"]

ENCODER_WIDTH = 256
STATE_WIDTH = 128
TOKEN_DIM = 64

START_IDX = 0
END_IDX = 1


class _SpDataset:
    """Features plus target token sequences (node indices, no sentinels)."""

    def __init__(self, feats: np.ndarray, tokens: list[list[int]]):
        self.feats = feats
        self.tokens = tokens

    def __len__(self) -> int:
        return len(self.tokens)


class SessionPathModel:
    def __init__(self, in_dim: int, vocab: list[NodeId], max_depth: int, seed: int = 0):
        if vocab[:2] != [START, END]:
            raise ValueError("node vocabulary must start with the start/end sentinels")
        rng = np.random.default_rng(seed)
        self.in_dim = in_dim
        self.vocab = list(vocab)
        self.node_index = {node: i for i, node in enumerate(vocab)}
        self.max_depth = max_depth
        V = len(vocab)
        self.encoder = DenseLayer(in_dim, ENCODER_WIDTH, "tanh", rng=rng)
        self.head_h = DenseLayer(ENCODER_WIDTH, STATE_WIDTH, "identity", rng=rng)
        self.head_c = DenseLayer(ENCODER_WIDTH, STATE_WIDTH, "identity", rng=rng)
        self.embedding = EmbeddingLayer(V, TOKEN_DIM, rng=rng)
        self.lstm = LstmLayer(TOKEN_DIM, STATE_WIDTH, rng=rng)
        self.fc = DenseLayer(STATE_WIDTH, STATE_WIDTH, "tanh", rng=rng)
        self.out = DenseLayer(STATE_WIDTH, len(vocab), "softmax", rng=rng)

    def params(self):
        layers = (self.encoder, self.head_h, self.head_c, self.embedding, self.lstm, self.fc, self.out)
        return [p for layer in layers for p in layer.params()]

    def vocab_hash(self) -> str:
        return vocabulary_hash(self.vocab)

    def _batch_arrays(self, ds: _SpDataset, idx: np.ndarray):
        """Teacher-forcing tensors: inputs [START, n1..nk], targets [n1..nk, END]."""
        seqs = [ds.tokens[i] for i in idx]
        B = len(seqs)
        T = max(len(s) for s in seqs) + 1
        inputs = np.full((T, B), END_IDX, dtype=np.int64)
        targets = np.full((T, B), END_IDX, dtype=np.int64)
        mask = np.zeros((T, B))
        for b, seq in enumerate(seqs):
            steps = len(seq) + 1
            inputs[0, b] = START_IDX
            inputs[1:steps, b] = seq
            targets[: steps - 1, b] = seq
            mask[:steps, b] = 1.0
        return inputs, targets, mask

    def _forward(self, feats: np.ndarray, inputs: np.ndarray) -> np.ndarray:
        enc = self.encoder.forward(feats)
        h0 = self.head_h.forward(enc)
        c0 = self.head_c.forward(enc)
        emb = self.embedding.forward(inputs)
        hs = self.lstm.forward(emb, h0, c0)
        return self.out.forward(self.fc.forward(hs))

    def _masked_loss(self, probs: np.ndarray, targets: np.ndarray, mask: np.ndarray) -> float:
        T, B, _ = probs.shape
        pt = probs[np.arange(T)[:, None], np.arange(B)[None, :], targets]
        clamped = (pt < 1e-12) & (mask > 0)
        if clamped.any():
            record_clamp_events(clamped.sum())
        losses = -np.log(np.maximum(pt, 1e-12)) * mask
        return float(losses.sum() / B)

    def batch_loss(self, ds: _SpDataset, idx: np.ndarray) -> float:
        inputs, targets, mask = self._batch_arrays(ds, idx)
        probs = self._forward(ds.feats[idx], inputs)
        return self._masked_loss(probs, targets, mask)

    def batch_loss_and_grads(self, ds: _SpDataset, idx: np.ndarray) -> float:
        inputs, targets, mask = self._batch_arrays(ds, idx)
        feats = ds.feats[idx]
        probs = self._forward(feats, inputs)
        loss = self._masked_loss(probs, targets, mask)

        T, B, V = probs.shape
        grad_logits = probs.copy()
        grad_logits[np.arange(T)[:, None], np.arange(B)[None, :], targets] -= 1.0
        grad_logits *= mask[:, :, None] / B

        grad_fc = self.out.backward_from_preactivation(grad_logits)
        grad_hs = self.fc.backward(grad_fc)
        grad_emb, grad_h0, grad_c0 = self.lstm.backward(grad_hs)
        self.embedding.backward(grad_emb)
        grad_enc = self.head_h.backward(grad_h0) + self.head_c.backward(grad_c0)
        self.encoder.backward(grad_enc)
        return loss

    def generate(self, feats: np.ndarray) -> tuple[list[NodeId], list[np.ndarray], list[float]]:
        """Greedy decode for one feature vector; no state is shared or kept.

        Emits at most max_depth + 1 steps; an argmax on either sentinel
        stops generation without emitting, so every returned distribution
        belongs to a real node of the path.
        """
        enc = self.encoder.apply(feats)
        h = self.head_h.apply(enc)
        c = self.head_c.apply(enc)
        token = START_IDX
        nodes: list[NodeId] = []
        dists: list[np.ndarray] = []
        ginis: list[float] = []
        for _ in range(self.max_depth + 1):
            h, c = self.lstm.step(self.embedding.E.value[token], h, c)
            dist = self.out.apply(self.fc.apply(h))
            j = int(np.argmax(dist))
            if j in (START_IDX, END_IDX):
                break
            nodes.append(self.vocab[j])
            dists.append(dist)
            ginis.append(gini(dist))
            token = j
        return nodes, dists, ginis

    def save(self, path: str, encoder_kind: str, ablate_session: bool) -> None:
        layer_names = ("encoder", "head_h", "head_c", "embedding", "lstm", "fc", "out")
        params = {}
        for name in layer_names:
            for p in getattr(self, name).params():
                params[f"{name}.{p.name}"] = p.value
        meta = {
            "vocab": [[n.depth, n.label] for n in self.vocab],
            "in_dim": self.in_dim,
            "max_depth": self.max_depth,
            "encoder_kind": encoder_kind,
            "ablate_session": ablate_session,
        }
        save_checkpoint(path, "sessionpath", params, meta, self.vocab_hash())

    @classmethod
    def load(cls, path: str, vocab_hash: str | None = None) -> tuple["SessionPathModel", dict]:
        payload = load_checkpoint(path, vocab_hash)
        meta = payload["meta"]
        vocab = [NodeId(d, label) for d, label in meta["vocab"]]
        model = cls(meta["in_dim"], vocab, meta["max_depth"])
        for key, value in payload["params"].items():
            layer_name, param_name = key.split(".", 1)
            layer = getattr(model, layer_name)
            target = next(p for p in layer.params() if p.name == param_name)
            target.value[...] = value
        return model, meta


@dataclass
class SessionPathPredictor:
    model: SessionPathModel
    query_encoder: QueryEncoder
    session_table: EmbeddingTable
    ablate_session: bool = False

    def predict(
        self,
        query: str,
        session_products: tuple[str, ...] | list[str],
        session_vec: np.ndarray | None = None,
    ) -> PathPrediction:
        return sp_generate(self, query, session_products, session_vec)

    def save(self, path: str) -> None:
        self.model.save(path, self.query_encoder.kind, self.ablate_session)

    @classmethod
    def load(
        cls,
        path: str,
        query_encoder: QueryEncoder,
        session_table: EmbeddingTable,
        vocab_hash: str | None = None,
    ) -> "SessionPathPredictor":
        model, meta = SessionPathModel.load(path, vocab_hash)
        return cls(model, query_encoder, session_table, meta["ablate_session"])


def _token_sequence(model: SessionPathModel, ex: LabeledExample) -> list[int]:
    seq = []
    for node in ex.target_path.nodes:
        if node not in model.node_index:
            raise ValueError(f"target node {node} missing from the vocabulary")
        seq.append(model.node_index[node])
    return seq


def sp_train(
    train_examples: list[LabeledExample],
    vocab: list[NodeId],
    max_depth: int,
    query_encoder: QueryEncoder,
    session_table: EmbeddingTable,
    config: TrainConfig,
    ablate_session: bool = False,
) -> tuple[SessionPathPredictor, TrainHistory]:
    """Teacher-forced training; validation is the chronologically last slice."""
    if not train_examples:
        raise ValueError("cannot train on an empty example list")
    feats = np.stack(
        [
            example_features(ex.query, ex.session_products, query_encoder, session_table, ablate_session)
            for ex in train_examples
        ]
    )
    model = SessionPathModel(feats.shape[1], vocab, max_depth, seed=config.seed)
    tokens = [_token_sequence(model, ex) for ex in train_examples]

    n_val = max(1, int(round(len(train_examples) * config.validation_fraction)))
    n_val = min(n_val, len(train_examples) - 1)
    train_ds = _SpDataset(feats[:-n_val], tokens[:-n_val])
    val_ds = _SpDataset(feats[-n_val:], tokens[-n_val:])

    history = train_loop(model, train_ds, val_ds, config)
    return SessionPathPredictor(model, query_encoder, session_table, ablate_session), history


def sp_generate(
    predictor: SessionPathPredictor,
    query: str,
    session_products: tuple[str, ...] | list[str],
    session_vec: np.ndarray | None = None,
) -> PathPrediction:
    feats = example_features(
        query,
        session_products,
        predictor.query_encoder,
        predictor.session_table,
        predictor.ablate_session,
        session_vec=session_vec,
    )
    nodes, dists, ginis = predictor.model.generate(feats)
    return PathPrediction(nodes=tuple(nodes), step_distributions=dists, step_gini=ginis)
