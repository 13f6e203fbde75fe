"""Tour of the HTTP service contract, against an in-process app.

Trains a throwaway model on a tiny corpus (seconds), then walks the
endpoints the way a type-ahead frontend would call them.

    python3 demos/service_tour.py
"""

import json
import tempfile

from fastapi.testclient import TestClient

from facetpath.embeddings import build_search2prod2vec, train_skipgram
from facetpath.eventlog import build_examples, chronological_split, ingest, session_view_sequences
from facetpath.neuralcore import TrainConfig
from facetpath.predictors import build_query_encoder, sp_train
from facetpath.service import ServiceArtifacts, create_app
from facetpath.synthetic import SynthConfig, generate_synthetic
from facetpath.taxonomy import load_catalog, node_vocabulary


def show(title: str, payload) -> None:
    print(f"\n=== {title}")
    print(json.dumps(payload, indent=2)[:800])


config = SynthConfig(n_products=60, n_sessions=150, branching=(3, 3), n_models=10)
with tempfile.TemporaryDirectory() as workdir:
    catalog_file, events_file, _ = generate_synthetic(config, seed=5, out_dir=workdir)
    tree = load_catalog(catalog_file)
    result = ingest(events_file, tree)
    split = chronological_split(build_examples(result, tree), fraction=0.8)

views = session_view_sequences(result.events)
product_table = train_skipgram(views, dim=16, epochs=3, seed=1, kind="product")
encoder = build_query_encoder("s2pv", build_search2prod2vec(split.train, product_table))
predictor, _ = sp_train(
    split.train, node_vocabulary(tree), tree.max_depth, encoder, product_table,
    TrainConfig(learning_rate=0.01, time_decay=1e-4, batch_size=32, max_epochs=15, patience=10),
)

artifacts = ServiceArtifacts(
    tree=tree,
    predictors={"sessionpath": predictor},
    default_model="sessionpath",
    session_table=product_table,
)
client = TestClient(create_app(artifacts))

show("GET /health", client.get("/health").json())

# the suggestion engine sends its candidates; each comes back with a path.
# this throwaway model is undertrained, so its confidences sit well below
# the strict default threshold; ct_override shows the paths it would emit.
query = split.train[0].query
basket = list(split.train[0].session_products[:3])
show(
    f"POST /augment (query {query!r}, default ct: too strict for this tiny model)",
    client.post("/augment", json={"session_products": [], "candidates": [query]}).json(),
)
show(
    "POST /augment (same query, ct_override 0.6)",
    client.post(
        "/augment",
        json={"session_products": [], "candidates": [query], "ct_override": 0.6},
    ).json(),
)
show(
    f"POST /augment (same query, session {basket}, ct_override 0.6)",
    client.post(
        "/augment",
        json={"session_products": basket, "candidates": [query], "ct_override": 0.6},
    ).json(),
)

# repeating a request is answered from the cache
again = client.post(
    "/augment",
    json={"session_products": basket, "candidates": [query], "ct_override": 0.6},
).json()
print(f"\nrepeat request cache_hit: {again['results'][0]['cache_hit']}")

# replay arithmetic for one hand-built event
show(
    "POST /simulate",
    client.post(
        "/simulate",
        json={
            "result_set": sorted(tree.product_to_path)[:6],
            "clicked": sorted(tree.product_to_path)[:2],
            "predicted_path": list(tree.path_of(sorted(tree.product_to_path)[0]).labels[:1]),
        },
    ).json(),
)

print("\n=== GET /metrics")
print(client.get("/metrics").text)
