"""Self-describing JSON model checkpoints.

A checkpoint stores parameter arrays at full precision together with the
hash of the node vocabulary it was trained against; loading against a
taxonomy whose vocabulary hashes differently is refused outright, because
decoder output indices would silently point at the wrong categories.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from ..taxonomy import NodeId

__all__ = ["vocabulary_hash", "save_checkpoint", "load_checkpoint", "CheckpointError"]


class CheckpointError(ValueError):
    pass


def vocabulary_hash(vocab: list[NodeId]) -> str:
    h = hashlib.sha256()
    for node in vocab:
        h.update(f"{node.depth}\t{node.label}\n".encode("utf-8"))
    return h.hexdigest()


def save_checkpoint(
    path: str,
    kind: str,
    params: dict[str, np.ndarray],
    meta: dict,
    vocab_hash: str,
) -> None:
    payload = {
        "kind": kind,
        "vocab_hash": vocab_hash,
        "meta": meta,
        "shapes": {name: list(arr.shape) for name, arr in params.items()},
        "params": {name: arr.reshape(-1).tolist() for name, arr in params.items()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)


def load_checkpoint(path: str, expected_vocab_hash: str | None = None) -> dict:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if expected_vocab_hash is not None and payload.get("vocab_hash") != expected_vocab_hash:
        raise CheckpointError(
            "checkpoint vocabulary hash does not match the live taxonomy; "
            "retrain or load the matching catalog"
        )
    params = {}
    for name, flat in payload["params"].items():
        shape = tuple(payload["shapes"][name])
        params[name] = np.array(flat, dtype=np.float64).reshape(shape)
    payload["params"] = params
    return payload
