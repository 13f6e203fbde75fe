"""Record real service payloads as JSON fixtures for the frontend tests.

Trains the same small shop as demos/quickstart.py, mounts the service
in-process, and captures /sweep plus a ladder of /augment responses for
one ambiguous query under engineered sessions. The frontend tests replay
these verbatim through a mocked fetch, so every number they assert on
came out of the real service once.

    python3 frontend/scripts/record_fixtures.py
"""

import collections
import json
import os
import tempfile

from fastapi.testclient import TestClient

from facetpath.config import AppConfig
from facetpath.embeddings import build_search2prod2vec, train_skipgram
from facetpath.evalharness import group_events, sweep_rows_for_predictor
from facetpath.eventlog import build_examples, chronological_split, ingest, session_view_sequences
from facetpath.neuralcore import TrainConfig
from facetpath.predictors import build_query_encoder, sp_train
from facetpath.service import ServiceArtifacts, create_app
from facetpath.synthetic import SynthConfig, generate_synthetic
from facetpath.taxonomy import load_catalog, node_vocabulary

FIXTURE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "tests", "fixtures")
TRACE_SAMPLE = 10
CATALOG_LIMIT = 40
# override ladder, strict to loose; every value round-trips through
# JS String(Number(x)) unchanged, which the request keying relies on
CT_LADDER = (0.999, 0.993, 0.95, 0.9, 0.5)

SHOP = SynthConfig(
    n_products=200,
    n_sessions=700,
    branching=(4, 3, 2),
    product_depth_weights=(0.3, 0.7),
    query_noise_rate=0.03,
    leaf_query_rate=0.2,
)
TRAIN = TrainConfig(
    learning_rate=0.004, time_decay=0.001, batch_size=64, max_epochs=120, patience=25, seed=0
)


def request_key(query: str, session: list[str], ct: float | None) -> str:
    ct_part = "default" if ct is None else f"{ct:g}"
    return f"{query}|{','.join(session)}|{ct_part}"


def main() -> None:
    with tempfile.TemporaryDirectory() as workdir:
        catalog_file, events_file, _ = generate_synthetic(SHOP, seed=42, out_dir=workdir)
        tree = load_catalog(catalog_file)
        result = ingest(events_file, tree)
    split = chronological_split(build_examples(result, tree), fraction=0.8)
    print(f"shop: {len(tree.product_to_path)} products, {len(split.train)} training examples")

    views = session_view_sequences(result.events)
    product_table = train_skipgram(views, dim=50, epochs=5, seed=1, kind="product")
    encoder = build_query_encoder("s2pv", build_search2prod2vec(split.train, product_table))
    predictor, history = sp_train(
        split.train, node_vocabulary(tree), tree.max_depth, encoder, product_table, TRAIN
    )
    print(f"trained: best epoch {history.best_epoch}, val loss {history.best_val_loss:.3f}")

    config = AppConfig()
    rows, trace = sweep_rows_for_predictor(
        predictor, group_events(split.test), tree, list(config.ct_values)
    )
    artifacts = ServiceArtifacts(
        tree=tree,
        predictors={"sessionpath": predictor},
        default_model="sessionpath",
        session_table=product_table,
        ct=config.ct,
        sweep_rows=rows,
        trace_sample=trace[:TRACE_SAMPLE],
    )
    client = TestClient(create_app(artifacts))

    # an ambiguous mid-level label: lives under at least two departments,
    # so the session basket decides which department wins
    by_mid = collections.defaultdict(set)
    for path in tree.product_to_path.values():
        if path.depth >= 2:
            by_mid[path.labels[1]].add(path.labels[0])
    label, tops = next((lab, sorted(t)) for lab, t in sorted(by_mid.items()) if len(t) >= 2)

    def basket_under(top: str) -> list[str]:
        picks = [
            pid
            for pid, path in sorted(tree.product_to_path.items())
            if path.labels[0] == top and path.depth >= 2 and path.labels[1] == label
        ]
        return picks[:3]

    session_a, session_b = basket_under(tops[0]), basket_under(tops[1])
    print(f"query {label!r}; sessions under {tops[0]} and {tops[1]}")

    responses = {}
    for session in ([], session_a, session_b):
        for ct in (None, *CT_LADDER):
            body = {"session_products": session, "candidates": [label]}
            if ct is not None:
                body["ct_override"] = ct
            reply = client.post("/augment", json=body)
            reply.raise_for_status()
            responses[request_key(label, session, ct)] = reply.json()

    # the fixtures must actually exhibit what the tests assert: divergent
    # paths across sessions, and depth that never shrinks as ct loosens
    path_a = responses[request_key(label, session_a, 0.9)]["results"][0]["path"]
    path_b = responses[request_key(label, session_b, 0.9)]["results"][0]["path"]
    if path_a == path_b:
        raise SystemExit(f"sessions did not diverge at ct=0.9: {path_a}")
    for session in ([], session_a, session_b):
        depths = [
            len(responses[request_key(label, session, ct)]["results"][0]["path"])
            for ct in CT_LADDER
        ]
        if any(b < a for a, b in zip(depths, depths[1:])):
            raise SystemExit(f"depth ladder not monotone for session {session}: {depths}")

    sweep_payload = client.get("/sweep").json()
    health = client.get("/health").json()
    catalog = client.get("/catalog", params={"limit": CATALOG_LIMIT}).json()

    os.makedirs(FIXTURE_DIR, exist_ok=True)
    with open(os.path.join(FIXTURE_DIR, "sweep.json"), "w", encoding="utf-8") as fh:
        json.dump(sweep_payload, fh, indent=2)
    with open(os.path.join(FIXTURE_DIR, "augment.json"), "w", encoding="utf-8") as fh:
        json.dump(
            {
                "query": label,
                "tops": tops,
                "session_a": session_a,
                "session_b": session_b,
                "ct_ladder": list(CT_LADDER),
                "health": health,
                "catalog": catalog,
                "responses": responses,
            },
            fh,
            indent=2,
        )
    print(f"wrote {FIXTURE_DIR}/sweep.json ({len(sweep_payload['rows'])} rows, "
          f"{len(sweep_payload['events'])} trace events)")
    print(f"wrote {FIXTURE_DIR}/augment.json ({len(responses)} recorded responses)")


if __name__ == "__main__":
    main()
