"""Count-based baseline: query -> most clicked path, above a share threshold.

Paths are plain labels here ("sport" and "sport/basketball" are unrelated
classes); a product contributes its full catalog path as its label. A path
qualifies for a query when it owns at least ``threshold`` of the query's
clicks; the stored prediction is the deepest qualifying path. Unseen
queries get no prediction at all.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

from ..eventlog import LabeledExample
from ..taxonomy import Path
from .common import normalize_query

__all__ = ["CountModel", "cm_train", "cm_predict"]

DEFAULT_SHARE_THRESHOLD = 0.8


@dataclass
class CountModel:
    threshold: float = DEFAULT_SHARE_THRESHOLD
    # query -> {path labels -> click share}
    path_shares: dict[str, dict[tuple[str, ...], float]] = field(default_factory=dict)
    predictions: dict[str, Path] = field(default_factory=dict)

    def predict(self, query: str, session_products=(), session_vec=None) -> Path | None:
        """Session args are accepted (and ignored) so callers can treat
        every predictor uniformly; this model keys on the query alone."""
        return cm_predict(self, query)

    def save(self, path: str) -> None:
        payload = {
            "kind": "count_model",
            "threshold": self.threshold,
            "shares": [
                [q, [[list(labels), share] for labels, share in sorted(shares.items())]]
                for q, shares in sorted(self.path_shares.items())
            ],
            "predictions": [[q, list(p.labels)] for q, p in sorted(self.predictions.items())],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)

    @classmethod
    def load(cls, path: str) -> "CountModel":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        model = cls(threshold=payload["threshold"])
        for q, pairs in payload["shares"]:
            model.path_shares[q] = {tuple(labels): share for labels, share in pairs}
        for q, labels in payload["predictions"]:
            model.predictions[q] = Path(tuple(labels))
        return model


def cm_train(train_examples: list[LabeledExample], threshold: float = DEFAULT_SHARE_THRESHOLD) -> CountModel:
    if not train_examples:
        raise ValueError("cannot train the count model on an empty example list")
    clicks: dict[str, Counter] = {}
    for ex in train_examples:
        q = normalize_query(ex.query)
        clicks.setdefault(q, Counter())[ex.target_path.labels] += 1

    model = CountModel(threshold=threshold)
    for q, counter in clicks.items():
        total = sum(counter.values())
        shares = {labels: n / total for labels, n in counter.items()}
        model.path_shares[q] = shares
        qualifying = [(labels, share) for labels, share in shares.items() if share >= threshold]
        if not qualifying:
            continue
        # deepest first, higher share breaks depth ties, then lexicographic
        qualifying.sort(key=lambda item: (-len(item[0]), -item[1], item[0]))
        model.predictions[q] = Path(qualifying[0][0])
    return model


def cm_predict(model: CountModel, query: str) -> Path | None:
    """Exact-lookup prediction; None for unseen or unqualified queries."""
    return model.predictions.get(normalize_query(query))
