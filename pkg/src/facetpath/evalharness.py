"""Offline evaluation of path predictors against replayed search logs.

Three layers:

- accuracy_at_depth scores predicted paths against clicked-product paths
  at fixed depths (1, 2, or exact full match).
- simulate_event replays one search event: the predicted path filters the
  recorded result set, clicked-product paths are the relevance feedback,
  and product-level TP/FP/FN fall out. sweep_thresholds re-truncates
  cached predictions per confidence threshold and micro-averages.
- run_experiment_suite trains the requested predictor variants across
  training fractions and seeds, then reports mean (and spread) per cell,
  plus the sweep, path validity, and a per-event trace for the tuner UI.
"""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .decision import DecisionConfig, truncate_prediction
from .embeddings import EmbeddingTable, build_search2prod2vec, tokenize, train_skipgram
from .eventlog import DatasetSplit, LabeledExample
from .neuralcore import TrainConfig
from .predictors import PathPrediction, build_query_encoder, cm_predict, cm_train, mlp_train, sp_train
from .taxonomy import EMPTY_PATH, Path, TaxonomyTree, is_valid_path, node_vocabulary

__all__ = [
    "SearchEventGroup",
    "SimResult",
    "SweepRow",
    "SuiteConfig",
    "EvalReport",
    "group_events",
    "golden_truth_set",
    "simulate_event",
    "accuracy_at_depth",
    "sweep_thresholds",
    "sweep_rows_for_predictor",
    "run_experiment_suite",
]

TABLE4_THRESHOLDS = (0.996, 0.993, 0.990, 0.980)
# A wider descending default so sweeps stay informative on small node
# vocabularies, whose one-hot Gini tops out at (n-1)/n.
DEFAULT_SWEEP_THRESHOLDS = (0.996, 0.993, 0.990, 0.980, 0.950, 0.900, 0.800)


@dataclass(frozen=True)
class SearchEventGroup:
    """One search event with at least one catalog-known click."""

    event_id: str
    timestamp: int
    query: str
    session_products: tuple[str, ...]
    result_set: tuple[str, ...]
    clicked: tuple[str, ...]


def group_events(examples: list[LabeledExample]) -> list[SearchEventGroup]:
    """Collapse per-click examples back into their search events."""
    seen: dict[str, SearchEventGroup] = {}
    for ex in examples:
        if ex.event_id not in seen:
            seen[ex.event_id] = SearchEventGroup(
                event_id=ex.event_id,
                timestamp=ex.timestamp,
                query=ex.query,
                session_products=ex.session_products,
                result_set=ex.result_set,
                clicked=ex.clicked,
            )
    return sorted(seen.values(), key=lambda e: (e.timestamp, e.event_id))


def _prediction_labels(pred) -> tuple[str, ...] | None:
    if pred is None:
        return None
    if isinstance(pred, PathPrediction):
        return pred.labels
    if isinstance(pred, Path):
        return pred.labels
    raise TypeError(f"cannot score a prediction of type {type(pred).__name__}")


def accuracy_at_depth(pairs, k) -> float:
    """Share of correct predictions at depth k ∈ {1, 2, ..., "last"}.

    Numeric k: targets shorter than k leave the denominator; a prediction
    is correct iff its first k nodes equal the target's first k. "last":
    exact full-path match. A missing prediction (None) is wrong wherever
    the target counts.
    """
    total = 0
    correct = 0
    for pred, target in pairs:
        labels = _prediction_labels(pred)
        if k == "last":
            total += 1
            if labels is not None and labels == target.labels:
                correct += 1
        else:
            if target.depth < k:
                continue
            total += 1
            if labels is not None and len(labels) >= k and labels[:k] == target.labels[:k]:
                correct += 1
    if total == 0:
        raise ValueError(f"no targets qualify at depth {k!r}")
    return correct / total


@dataclass(frozen=True)
class SimResult:
    tp: int
    fp: int
    fn: int
    # True when the filter kept nothing and no result product matched any
    # truth path: both rates undefined, event reported but not averaged.
    excluded: bool

    @property
    def precision(self) -> float | None:
        denom = self.tp + self.fp
        return self.tp / denom if denom else None

    @property
    def recall(self) -> float | None:
        denom = self.tp + self.fn
        return self.tp / denom if denom else None


def golden_truth_set(event: SearchEventGroup, tree: TaxonomyTree) -> frozenset[tuple[str, ...]]:
    """Paths of the clicked products: the event's relevance feedback."""
    return frozenset(
        tree.product_to_path[p].labels for p in event.clicked if p in tree.product_to_path
    )


def simulate_event(event: SearchEventGroup, predicted, tree: TaxonomyTree) -> SimResult:
    """Replay one event: filter the result set by the predicted path.

    A product is retained iff the prediction is a prefix of its catalog
    path, so an empty prediction retains everything. TP = retained
    products on a truth path, FP = retained off-truth, FN = truth-path
    products the filter dropped. TP+FN depends only on the event, never
    on the prediction. Result-set products missing from the catalog are
    ignored.
    """
    golden = golden_truth_set(event, tree)
    labels = _prediction_labels(predicted) or ()
    k = len(labels)
    tp = fp = matching = 0
    for pid in event.result_set:
        path = tree.product_to_path.get(pid)
        if path is None:
            continue
        is_match = path.labels in golden
        matching += is_match
        if path.labels[:k] == labels:
            if is_match:
                tp += 1
            else:
                fp += 1
    fn = matching - tp
    return SimResult(tp, fp, fn, excluded=(tp + fp == 0 and matching == 0))


@dataclass(frozen=True)
class SweepRow:
    ct: float
    micro_precision: float | None
    micro_recall: float | None
    macro_precision: float | None
    macro_recall: float | None
    mean_depth: float
    events: int
    excluded: int  # events with neither retained nor matching products
    no_filtered: int  # precision-undefined events (filter kept nothing)

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def _truncated(pred, cfg: DecisionConfig, tree: TaxonomyTree | None) -> Path:
    if pred is None:
        return EMPTY_PATH
    if isinstance(pred, PathPrediction):
        return truncate_prediction(pred, cfg, tree)
    return pred


def sweep_thresholds(
    event_predictions, ct_values, tree: TaxonomyTree, safety_check: bool = False
) -> list[SweepRow]:
    """Re-truncate cached predictions per ct and aggregate the replay.

    ``event_predictions`` pairs each SearchEventGroup with the prediction
    computed once for it (a PathPrediction re-truncates per ct; a plain
    Path or None is fixed across the sweep). Micro-averaging sums TP/FP/FN
    over events before dividing; macro averages the per-event rates that
    exist.
    """
    rows = []
    for ct in ct_values:
        cfg = DecisionConfig(ct=ct, safety_check=safety_check)
        tp = fp = fn = 0
        precisions: list[float] = []
        recalls: list[float] = []
        depths: list[int] = []
        excluded = no_filtered = 0
        for event, pred in event_predictions:
            path = _truncated(pred, cfg, tree if safety_check else None)
            depths.append(path.depth)
            sim = simulate_event(event, path, tree)
            if sim.excluded:
                excluded += 1
                continue
            tp += sim.tp
            fp += sim.fp
            fn += sim.fn
            if sim.precision is None:
                no_filtered += 1
            else:
                precisions.append(sim.precision)
            if sim.recall is not None:
                recalls.append(sim.recall)
        rows.append(
            SweepRow(
                ct=ct,
                micro_precision=tp / (tp + fp) if tp + fp else None,
                micro_recall=tp / (tp + fn) if tp + fn else None,
                macro_precision=float(np.mean(precisions)) if precisions else None,
                macro_recall=float(np.mean(recalls)) if recalls else None,
                mean_depth=float(np.mean(depths)) if depths else 0.0,
                events=len(event_predictions),
                excluded=excluded,
                no_filtered=no_filtered,
            )
        )
    return rows


@dataclass(frozen=True)
class SuiteConfig:
    """What run_experiment_suite trains and measures.

    A variant key is "cm" or "<model>+<encoder>" with an optional
    "-nosession" suffix that zeroes the session half of the features.
    """

    variants: tuple[str, ...] = (
        "cm",
        "mlp+s2pv",
        "sessionpath+s2pv",
        "sessionpath+s2pv-nosession",
    )
    fractions: tuple[float, ...] = (0.1, 0.25, 1.0)
    seeds: tuple[int, ...] = (11, 12, 13, 14, 15)
    ct_values: tuple[float, ...] = DEFAULT_SWEEP_THRESHOLDS
    train: TrainConfig = TrainConfig()
    # Per-model TrainConfig field overrides ("mlp"/"sessionpath"), so each
    # model runs at its own tuned optimum within one suite.
    train_overrides: dict = dataclasses.field(default_factory=dict)
    # Per-variant fraction overrides, e.g. run the ablation at 1.0 only.
    variant_fractions: dict = dataclasses.field(default_factory=dict)
    embedding_dim: int = 50
    embedding_epochs: int = 10
    embedding_seed: int = 1
    # Variant whose max-fraction first-seed predictions feed the sweep,
    # validity rate and trace.
    sweep_variant: str = "sessionpath+s2pv"

    def __post_init__(self) -> None:
        for f in self.fractions:
            if not 0.0 < f <= 1.0:
                raise ValueError(f"fraction must be in (0, 1], got {f}")
        if not self.seeds:
            raise ValueError("at least one seed required")
        for key in self.variants:
            _parse_variant(key)
        train_fields = {f.name for f in dataclasses.fields(TrainConfig)}
        for model, overrides in self.train_overrides.items():
            if model not in ("mlp", "sessionpath"):
                raise ValueError(f"train_overrides key must be a model name, got {model!r}")
            unknown = set(overrides) - train_fields
            if unknown:
                raise ValueError(f"unknown TrainConfig fields for {model}: {sorted(unknown)}")
        for key, fractions in self.variant_fractions.items():
            _parse_variant(key)
            for f in fractions:
                if not 0.0 < f <= 1.0:
                    raise ValueError(f"fraction must be in (0, 1], got {f}")

    def fractions_for(self, variant: str) -> tuple[float, ...]:
        return tuple(self.variant_fractions.get(variant, self.fractions))


def _parse_variant(key: str) -> tuple[str, str | None, bool]:
    """ "sessionpath+s2pv-nosession" -> ("sessionpath", "s2pv", True)."""
    ablate = key.endswith("-nosession")
    base = key[: -len("-nosession")] if ablate else key
    if base == "cm":
        if ablate:
            raise ValueError("cm has no session input to ablate")
        return "cm", None, False
    if "+" not in base:
        raise ValueError(f"variant {key!r} needs an encoder, e.g. '{base}+s2pv'")
    model, encoder = base.split("+", 1)
    if model not in ("mlp", "sessionpath"):
        raise ValueError(f"unknown model in variant {key!r}")
    if encoder not in ("s2pv", "w2v"):
        raise ValueError(f"unknown encoder in variant {key!r}")
    return model, encoder, ablate


@dataclass
class EvalReport:
    cells: dict[str, dict]
    sweep: list[SweepRow]
    validity_rate: float | None
    counts: dict[str, int]
    runtime_seconds: dict[str, float]

    def to_json(self) -> dict:
        return {
            "cells": self.cells,
            "sweep": [row.to_json() for row in self.sweep],
            "validity_rate": self.validity_rate,
            "counts": self.counts,
            "runtime_seconds": {k: round(v, 3) for k, v in self.runtime_seconds.items()},
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")


METRIC_KEYS = ("d1", "d2", "dlast", "d1_seen", "d2_seen", "dlast_seen", "d1_unseen", "d2_unseen", "dlast_unseen")


def _accuracies(pairs, seen_mask) -> dict[str, float | None]:
    """All nine accuracy cells; None where a subset has no qualifying target."""
    subsets = {
        "": pairs,
        "_seen": [p for p, m in zip(pairs, seen_mask) if m],
        "_unseen": [p for p, m in zip(pairs, seen_mask) if not m],
    }
    out: dict[str, float | None] = {}
    for suffix, subset in subsets.items():
        for name, k in (("d1", 1), ("d2", 2), ("dlast", "last")):
            try:
                out[name + suffix] = accuracy_at_depth(subset, k)
            except ValueError:
                out[name + suffix] = None
    return out


def _subset_for(fraction: float, seed: int, train: list[LabeledExample]) -> list[LabeledExample]:
    if fraction >= 1.0:
        return train
    n = len(train)
    k = max(1, int(round(n * fraction)))
    rng = np.random.default_rng((seed, int(round(fraction * 1000))))
    idx = np.sort(rng.choice(n, size=k, replace=False))
    return [train[i] for i in idx]


class _PredictionCache:
    """One predictor call per distinct (query, session) pair."""

    def __init__(self, predict):
        self.predict = predict
        self.store: dict[tuple, object] = {}

    def __call__(self, query: str, session_products: tuple[str, ...]):
        key = (query, session_products)
        if key not in self.store:
            self.store[key] = self.predict(query, session_products)
        return self.store[key]


def run_experiment_suite(
    split: DatasetSplit,
    tree: TaxonomyTree,
    view_sessions: list[list[str]],
    config: SuiteConfig,
    trace_path=None,
) -> EvalReport:
    """Train every (variant, fraction, seed) cell and score the test set.

    Product embeddings are trained once on the full view-session corpus
    (unsupervised), query embeddings per sampled train subset (they
    depend on labeled clicks). A failed cell is recorded with its error
    and the suite continues. Identical inputs give an identical report.
    """
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    product_table = train_skipgram(
        view_sessions,
        dim=config.embedding_dim,
        epochs=config.embedding_epochs,
        seed=config.embedding_seed,
        kind="product",
    )
    timings["product_embeddings"] = time.perf_counter() - t0

    vocab = node_vocabulary(tree)
    train_queries = {x.query for x in split.train}
    seen_mask = [x.query in train_queries for x in split.test]
    test_events = group_events(split.test)

    query_tables: dict[tuple, EmbeddingTable] = {}

    def _query_table(kind: str, fraction: float, seed: int, subset) -> EmbeddingTable:
        key = (kind, fraction, seed)
        if key not in query_tables:
            if kind == "s2pv":
                query_tables[key] = build_search2prod2vec(subset, product_table)
            else:
                corpus = [tokenize(ex.query) for ex in subset]
                query_tables[key] = train_skipgram(
                    corpus,
                    dim=config.embedding_dim,
                    epochs=config.embedding_epochs,
                    seed=config.embedding_seed,
                    kind="token",
                )
        return query_tables[key]

    cells: dict[str, dict] = {}
    sweep_rows: list[SweepRow] = []
    validity_rate: float | None = None
    trace_records: list[dict] = []

    for variant in config.variants:
        model_name, encoder_kind, ablate = _parse_variant(variant)
        variant_fractions = config.fractions_for(variant)
        for fraction in variant_fractions:
            cell_key = f"{variant}|fraction={fraction:g}"
            per_seed: list[dict] = []
            cell: dict = {"per_seed": per_seed}
            cells[cell_key] = cell
            t_cell = time.perf_counter()
            for seed in config.seeds:
                try:
                    subset = _subset_for(fraction, seed, split.train)
                    if model_name == "cm":
                        cm = cm_train(subset)
                        cache = _PredictionCache(lambda q, s: cm_predict(cm, q))
                    else:
                        table = _query_table(encoder_kind, fraction, seed, subset)
                        encoder = build_query_encoder(encoder_kind, table)
                        tc = dataclasses.replace(
                            config.train, seed=seed, **config.train_overrides.get(model_name, {})
                        )
                        if model_name == "mlp":
                            predictor, _ = mlp_train(subset, encoder, product_table, tc, ablate_session=ablate)
                        else:
                            predictor, _ = sp_train(
                                subset, vocab, tree.max_depth, encoder, product_table, tc, ablate_session=ablate
                            )
                        cache = _PredictionCache(predictor.predict)
                    pairs = [
                        (cache(ex.query, ex.session_products), ex.target_path) for ex in split.test
                    ]
                    metrics = _accuracies(pairs, seen_mask)
                    per_seed.append({"seed": seed, **metrics})

                    is_sweep_cell = (
                        variant == config.sweep_variant
                        and fraction == max(variant_fractions)
                        and seed == config.seeds[0]
                        and model_name != "cm"
                    )
                    if is_sweep_cell:
                        event_preds = [
                            (ev, cache(ev.query, ev.session_products)) for ev in test_events
                        ]
                        sweep_rows = sweep_thresholds(event_preds, config.ct_values, tree)
                        nonempty = [p for _, p in event_preds if p.labels]
                        validity_rate = (
                            sum(is_valid_path(tree, Path(p.labels)) for p in nonempty) / len(nonempty)
                            if nonempty
                            else 1.0
                        )
                        trace_records = _trace(event_preds, config.ct_values, tree)
                except Exception as exc:  # noqa: BLE001 - cell isolation is the contract
                    cell["failed"] = f"seed {seed}: {type(exc).__name__}: {exc}"
                    break
            if per_seed and "failed" not in cell:
                cell["mean"] = _aggregate(per_seed, np.mean)
                sd = _aggregate(per_seed, lambda v: np.std(v, ddof=1) if len(v) > 1 else 0.0)
                # Reporting rule: spreads under 0.01 are noise, omit them.
                cell["sd"] = {k: v for k, v in sd.items() if v is not None and v >= 0.01}
            timings[cell_key] = time.perf_counter() - t_cell

    report = EvalReport(
        cells=cells,
        sweep=sweep_rows,
        validity_rate=validity_rate,
        counts={
            "train": len(split.train),
            "test": len(split.test),
            "seen": sum(seen_mask),
            "unseen": len(seen_mask) - sum(seen_mask),
            "test_events": len(test_events),
        },
        runtime_seconds=timings,
    )
    if trace_path is not None and trace_records:
        with open(trace_path, "w", encoding="utf-8") as fh:
            for rec in trace_records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return report


def _aggregate(per_seed: list[dict], fn) -> dict[str, float | None]:
    out: dict[str, float | None] = {}
    for key in METRIC_KEYS:
        values = [row[key] for row in per_seed if row.get(key) is not None]
        out[key] = float(fn(values)) if values else None
    return out


def _trace(event_preds, ct_values, tree: TaxonomyTree) -> list[dict]:
    """Per-event decoder output and its truncation at every swept ct."""
    records = []
    for event, pred in event_preds:
        truncations = {
            f"{ct:g}": list(_truncated(pred, DecisionConfig(ct=ct), None).labels) for ct in ct_values
        }
        records.append(
            {
                "event_id": event.event_id,
                "query": event.query,
                "path": list(pred.labels),
                "gini": [round(g, 6) for g in pred.step_gini],
                "truncated": truncations,
            }
        )
    return records


def sweep_rows_for_predictor(
    predictor, events: list[SearchEventGroup], tree: TaxonomyTree, ct_values: list[float]
) -> tuple[list[dict], list[dict]]:
    """One prediction per event, swept over thresholds.

    Returns JSON-ready sweep rows plus the per-event trace the threshold
    explorer replays. The predictor must emit PathPredictions (per-node
    distributions are what a ct sweep re-truncates).
    """
    cache = _PredictionCache(predictor.predict)
    event_preds = [(ev, cache(ev.query, ev.session_products)) for ev in events]
    rows = [row.to_json() for row in sweep_thresholds(event_preds, ct_values, tree)]
    return rows, _trace(event_preds, ct_values, tree)
