import json

import pytest

from facetpath.eventlog import build_examples, ingest
from facetpath.synthetic import SynthConfig, SynthesisError, generate_synthetic
from facetpath.taxonomy import load_catalog

SMALL = SynthConfig(n_products=80, n_sessions=120, branching=(4, 3, 3))


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_deterministic_for_fixed_seed(tmp_path):
    a = generate_synthetic(SMALL, seed=3, out_dir=str(tmp_path / "a"))
    b = generate_synthetic(SMALL, seed=3, out_dir=str(tmp_path / "b"))
    for fa, fb in zip(a, b):
        assert _read(fa) == _read(fb)


def test_seed_changes_output(tmp_path):
    a = generate_synthetic(SMALL, seed=3, out_dir=str(tmp_path / "a"))
    b = generate_synthetic(SMALL, seed=4, out_dir=str(tmp_path / "b"))
    assert _read(a[1]) != _read(b[1])


def test_catalog_is_loadable_and_sized(tmp_path):
    catalog, _, _ = generate_synthetic(SMALL, seed=1, out_dir=str(tmp_path))
    tree = load_catalog(catalog)
    assert len(tree) == SMALL.n_products
    depths = {p.depth for p in tree.product_to_path.values()}
    assert depths <= {2, 3}
    assert max(depths) == 3


def test_log_replays_cleanly(tmp_path):
    catalog, events, _ = generate_synthetic(SMALL, seed=1, out_dir=str(tmp_path))
    tree = load_catalog(catalog)
    result = ingest(events, tree)
    assert result.dropped_view_products == 0
    assert result.rejected_search_events == 0
    examples = build_examples(result, tree)
    assert examples
    # every target path is a real catalog path
    assert all(tree.has_prefix(x.target_path.labels) for x in examples)


def test_queries_use_description_tokens(tmp_path):
    catalog, events, manifest = generate_synthetic(
        SynthConfig(n_products=80, n_sessions=150, branching=(4, 3, 3), query_noise_rate=0.0),
        seed=5, out_dir=str(tmp_path),
    )
    descriptions = {}
    with open(catalog, encoding="utf-8") as fh:
        for line in fh:
            row = json.loads(line)
            descriptions[row["product_id"]] = set(row["description"].split())
    all_tokens = set().union(*descriptions.values())
    with open(events, encoding="utf-8") as fh:
        for line in fh:
            row = json.loads(line)
            if row["kind"] != "search":
                continue
            toks = row["query"].split()
            assert 1 <= len(toks) <= 3
            assert set(toks) <= all_tokens


def test_manifest_records_intended_paths(tmp_path):
    catalog, events, manifest = generate_synthetic(SMALL, seed=2, out_dir=str(tmp_path))
    tree = load_catalog(catalog)
    searches = 0
    with open(events, encoding="utf-8") as fh:
        searches = sum(1 for line in fh if json.loads(line)["kind"] == "search")
    rows = [json.loads(line) for line in open(manifest, encoding="utf-8")]
    assert len(rows) == searches
    for row in rows:
        assert set(row) == {"query", "session_id", "intended_path"}
        assert tree.has_prefix(tuple(row["intended_path"]))


def test_clicks_stay_inside_result_set(tmp_path):
    _, events, _ = generate_synthetic(SMALL, seed=6, out_dir=str(tmp_path))
    with open(events, encoding="utf-8") as fh:
        for line in fh:
            row = json.loads(line)
            if row["kind"] == "search":
                assert set(row["clicked"]) <= set(row["result_set"])
                assert row["clicked"]


def test_session_coherence_dominates(tmp_path):
    catalog, events, _ = generate_synthetic(
        SynthConfig(n_products=100, n_sessions=400, branching=(4, 3, 3),
                    session_coherence_rate=1.0),
        seed=7, out_dir=str(tmp_path),
    )
    tree = load_catalog(catalog)
    by_session = {}
    with open(events, encoding="utf-8") as fh:
        for line in fh:
            row = json.loads(line)
            if row["kind"] == "view":
                top = tree.path_of(row["product_id"]).labels[0]
                by_session.setdefault(row["session_id"], set()).add(top)
    assert by_session
    assert all(len(tops) == 1 for tops in by_session.values())


@pytest.mark.parametrize(
    "config",
    [
        SynthConfig(n_products=0),
        SynthConfig(branching=(3,)),
        SynthConfig(branching=(3, 3, 3, 3, 3)),
        SynthConfig(branching=(99, 3, 3)),
        SynthConfig(query_noise_rate=1.5),
        SynthConfig(product_depth_weights=(1.0,)),
        SynthConfig(result_set_size=1),
    ],
)
def test_infeasible_configs_rejected(config, tmp_path):
    with pytest.raises(SynthesisError):
        generate_synthetic(config, seed=0, out_dir=str(tmp_path))
