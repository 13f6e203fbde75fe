"""End-to-end walkthrough: synthesize a shop, train the path generator,
and watch one ambiguous query resolve differently under two sessions.

Run from the repo root (takes about a minute on one CPU):

    python3 demos/quickstart.py
"""

import collections
import tempfile

from facetpath.decision import DecisionConfig, truncate_prediction
from facetpath.embeddings import build_search2prod2vec, train_skipgram
from facetpath.eventlog import build_examples, chronological_split, ingest, session_view_sequences
from facetpath.neuralcore import TrainConfig
from facetpath.predictors import build_query_encoder, sp_train
from facetpath.synthetic import SynthConfig, generate_synthetic
from facetpath.taxonomy import load_catalog, node_vocabulary

# A small shop where most deep-product queries name only the mid-level
# label ("shoes"), which exists under several departments: the leaf is
# decidable only from what the shopper already viewed.
config = SynthConfig(
    n_products=200,
    n_sessions=700,
    branching=(4, 3, 2),
    product_depth_weights=(0.3, 0.7),
    query_noise_rate=0.03,
    leaf_query_rate=0.2,
)

with tempfile.TemporaryDirectory() as workdir:
    catalog_file, events_file, _ = generate_synthetic(config, seed=42, out_dir=workdir)
    tree = load_catalog(catalog_file)
    result = ingest(events_file, tree)
    examples = build_examples(result, tree)
    split = chronological_split(examples, fraction=0.8)
    print(f"shop: {len(tree.product_to_path)} products, "
          f"{len(result.events)} events, {len(split.train)} training examples")

# product vectors from co-viewed session sequences, query vectors from
# click-weighted product vectors (composes to unseen queries via unigrams)
views = session_view_sequences(result.events)
product_table = train_skipgram(views, dim=50, epochs=5, seed=1, kind="product")
query_table = build_search2prod2vec(split.train, product_table)
encoder = build_query_encoder("s2pv", query_table)

train_config = TrainConfig(
    learning_rate=0.004, time_decay=0.001, batch_size=64, max_epochs=120, patience=25, seed=0
)
predictor, history = sp_train(
    split.train, node_vocabulary(tree), tree.max_depth, encoder, product_table, train_config
)
print(f"trained: best epoch {history.best_epoch}, "
      f"val loss {history.best_val_loss:.3f}, stopped at {history.stopped_epoch}")

# find a mid-level label that lives under two departments
by_mid = collections.defaultdict(set)
for path in tree.product_to_path.values():
    if path.depth >= 2:
        by_mid[path.labels[1]].add(path.labels[0])
label, tops = next((lab, sorted(t)) for lab, t in sorted(by_mid.items()) if len(t) >= 2)
print(f"\nambiguous query: {label!r} (exists under {' and '.join(tops)})")


def basket_under(top: str) -> list[str]:
    picks = [pid for pid, path in sorted(tree.product_to_path.items())
             if path.labels[0] == top and path.depth >= 2 and path.labels[1] == label]
    return picks[:3]


for top in tops:
    basket = basket_under(top)
    pred = predictor.predict(label, basket)
    print(f"\n  session browsing {top}: {basket}")
    if pred is None:
        print("  -> no prediction")
        continue
    for node, g in zip(pred.nodes, pred.step_gini):
        print(f"  -> {node.label:<14} confidence {g:.4f}")
    for ct in (0.993, 0.95, 0.9):
        kept = truncate_prediction(pred, DecisionConfig(ct=ct))
        shown = "/".join(kept.labels) if kept.depth else "(no facet)"
        print(f"     at ct={ct}: suggest {shown}")
