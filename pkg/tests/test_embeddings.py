"""Embedding tables, skip-gram training, and the pooled encoders."""

import numpy as np
import pytest

from facetpath.embeddings import (
    EmbeddingTable,
    build_search2prod2vec,
    import_external_query_embeddings,
    query_vector_s2pv,
    query_vector_word2vec,
    session_vector,
    tokenize,
    train_skipgram,
)
from facetpath.eventlog import LabeledExample
from facetpath.taxonomy import Path


def table_of(**vectors) -> EmbeddingTable:
    arrays = {k: np.asarray(v, dtype=np.float64) for k, v in vectors.items()}
    dim = len(next(iter(arrays.values())))
    return EmbeddingTable(dim=dim, kind="product", vectors=arrays)


def example(query: str, product: str) -> LabeledExample:
    return LabeledExample(
        session_id="s0",
        event_id="e0",
        timestamp=0,
        session_products=(),
        query=query,
        clicked_product=product,
        target_path=Path.of("cat"),
        result_set=(product,),
        clicked=(product,),
    )


class TestTokenize:
    def test_lowercase_and_punctuation(self):
        assert tokenize("Nike AIR-Max, size 10!") == ["nike", "air", "max", "size", "10"]

    def test_empty(self):
        assert tokenize("") == []
        assert tokenize("  ---  ") == []


class TestTrainSkipgram:
    CORPUS = [["a", "b", "c"], ["a", "b"], ["x", "y", "z"], ["x", "y"], ["a", "c"]] * 4

    def test_deterministic_across_runs(self):
        t1 = train_skipgram(self.CORPUS, dim=8, epochs=2, seed=7)
        t2 = train_skipgram(self.CORPUS, dim=8, epochs=2, seed=7)
        assert sorted(t1.vectors) == sorted(t2.vectors)
        for key in t1.vectors:
            np.testing.assert_array_equal(t1[key], t2[key])

    def test_seed_changes_vectors(self):
        t1 = train_skipgram(self.CORPUS, dim=8, epochs=2, seed=7)
        t2 = train_skipgram(self.CORPUS, dim=8, epochs=2, seed=8)
        assert any(not np.array_equal(t1[k], t2[k]) for k in t1.vectors)

    def test_shapes_and_vocab(self):
        table = train_skipgram(self.CORPUS, dim=8, epochs=1, seed=0)
        assert sorted(table.vectors) == ["a", "b", "c", "x", "y", "z"]
        assert all(v.shape == (8,) for v in table.vectors.values())

    def test_vectors_finite_and_bounded(self):
        table = train_skipgram(self.CORPUS, dim=8, epochs=10, seed=0)
        for vec in table.vectors.values():
            assert np.all(np.isfinite(vec))
            assert np.max(np.abs(vec)) < 1e3

    def test_cooccurring_tokens_closer(self):
        # a/b/c and x/y/z never co-occur, so the topics should separate
        table = train_skipgram(self.CORPUS * 10, dim=8, epochs=10, seed=0)

        def cos(u, v):
            return float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)))

        assert cos(table["a"], table["b"]) > cos(table["a"], table["x"])

    def test_min_count_filters(self):
        corpus = [["a", "b"], ["a", "b"], ["a", "rare"]]
        table = train_skipgram(corpus, dim=4, epochs=1, seed=0, min_count=2)
        assert "rare" not in table
        assert "a" in table

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            train_skipgram([], dim=8)

    def test_tiny_dim_rejected(self):
        with pytest.raises(ValueError):
            train_skipgram(self.CORPUS, dim=1)

    def test_min_count_can_empty_vocab(self):
        with pytest.raises(ValueError):
            train_skipgram([["a"], ["b"]], dim=4, min_count=5)


class TestSessionVector:
    TABLE = table_of(p1=[1.0, 0.0], p2=[0.0, 1.0], p3=[2.0, 2.0])

    def test_mean_of_known(self):
        sv = session_vector(["p1", "p2"], self.TABLE)
        np.testing.assert_allclose(sv.values, [0.5, 0.5])
        assert not sv.is_empty_session

    def test_permutation_invariant(self):
        a = session_vector(["p1", "p2", "p3"], self.TABLE)
        b = session_vector(["p3", "p1", "p2"], self.TABLE)
        np.testing.assert_array_equal(a.values, b.values)

    def test_unknown_products_skipped(self):
        sv = session_vector(["p1", "ghost"], self.TABLE)
        np.testing.assert_allclose(sv.values, [1.0, 0.0])

    def test_empty_session_flagged(self):
        for products in ([], ["ghost"]):
            sv = session_vector(products, self.TABLE)
            np.testing.assert_array_equal(sv.values, [0.0, 0.0])
            assert sv.is_empty_session


class TestQueryVectorWord2vec:
    TABLE = EmbeddingTable(
        dim=2, kind="token", vectors={"nike": np.array([2.0, 0.0]), "shoes": np.array([0.0, 4.0])}
    )

    def test_mean_of_token_vectors(self):
        qv = query_vector_word2vec("Nike Shoes", self.TABLE)
        np.testing.assert_allclose(qv.values, [1.0, 2.0])
        assert qv.coverage == 1.0

    def test_partial_coverage(self):
        qv = query_vector_word2vec("nike sneakers", self.TABLE)
        np.testing.assert_allclose(qv.values, [2.0, 0.0])
        assert qv.coverage == 0.5

    def test_empty_query(self):
        qv = query_vector_word2vec("", self.TABLE)
        np.testing.assert_array_equal(qv.values, [0.0, 0.0])
        assert qv.coverage == 0.0


class TestSearch2Prod2Vec:
    def test_single_product_query_equals_product_vector(self):
        table = table_of(A=[1.0, 2.0], B=[5.0, 6.0])
        examples = [example("nike", "A")] * 3
        unigrams = build_search2prod2vec(examples, table)
        np.testing.assert_allclose(unigrams["nike"], table["A"])

    def test_even_clicks_give_midpoint(self):
        table = table_of(A=[1.0, 0.0], B=[0.0, 1.0])
        examples = [example("nike", "A")] * 5 + [example("nike", "B")] * 5
        unigrams = build_search2prod2vec(examples, table)
        np.testing.assert_allclose(unigrams["nike"], [0.5, 0.5])

    def test_unigram_weighted_by_query_clicks(self):
        # token "shoe" in two queries with 10 and 30 clicks on distinct products
        table = table_of(A=[1.0, 0.0], B=[0.0, 1.0])
        examples = [example("red shoe", "A")] * 10 + [example("blue shoe", "B")] * 30
        unigrams = build_search2prod2vec(examples, table)
        np.testing.assert_allclose(unigrams["shoe"], (10 * table["A"] + 30 * table["B"]) / 40)

    def test_unweighted_unigrams(self):
        table = table_of(A=[1.0, 0.0], B=[0.0, 1.0])
        examples = [example("red shoe", "A")] * 10 + [example("blue shoe", "B")] * 30
        unigrams = build_search2prod2vec(examples, table, weighted_unigrams=False)
        np.testing.assert_allclose(unigrams["shoe"], [0.5, 0.5])

    def test_out_of_vocab_products_omitted(self):
        table = table_of(A=[1.0, 0.0])
        examples = [example("nike", "A"), example("ghostquery", "UNKNOWN")]
        unigrams = build_search2prod2vec(examples, table)
        assert "nike" in unigrams
        assert "ghostquery" not in unigrams

    def test_repeated_token_in_query_counted_once(self):
        table = table_of(A=[1.0, 0.0], B=[0.0, 1.0])
        examples = [example("shoe shoe", "A")] * 2 + [example("red shoe", "B")] * 2
        unigrams = build_search2prod2vec(examples, table)
        np.testing.assert_allclose(unigrams["shoe"], [0.5, 0.5])

    def test_composition_covers_unseen_query(self):
        table = table_of(A=[1.0, 0.0], B=[0.0, 1.0])
        examples = [example("nike", "A")] * 2 + [example("shoes", "B")] * 2
        unigrams = build_search2prod2vec(examples, table)
        qv = query_vector_s2pv("nike shoes", unigrams)  # never seen verbatim
        np.testing.assert_allclose(qv.values, [0.5, 0.5])
        assert qv.coverage == 1.0

    def test_degenerate_query_matches_w2v_style_pooling(self):
        # one-token queries each clicking one product: unigram == product vector,
        # so s2pv pooling equals pooling the product vectors directly
        table = table_of(A=[2.0, 0.0], B=[0.0, 4.0])
        examples = [example("alpha", "A"), example("beta", "B")]
        unigrams = build_search2prod2vec(examples, table)
        qv = query_vector_s2pv("alpha beta", unigrams)
        np.testing.assert_allclose(qv.values, (table["A"] + table["B"]) / 2)


class TestTableSerialization:
    def test_roundtrip_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        table = EmbeddingTable(
            dim=5, kind="product", vectors={f"p{i}": rng.standard_normal(5) for i in range(10)}
        )
        path = str(tmp_path / "vecs.tsv")
        table.save(path)
        loaded = EmbeddingTable.load(path)
        assert loaded.dim == 5 and loaded.kind == "product"
        assert sorted(loaded.vectors) == sorted(table.vectors)
        for key in table.vectors:
            np.testing.assert_array_equal(loaded[key], table[key])

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("not a header\n")
        with pytest.raises(ValueError, match="header"):
            EmbeddingTable.load(str(path))

    def test_wrong_width_rejected(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("dim=3 kind=product\np1\t1.0 2.0\n")
        with pytest.raises(ValueError, match="line 2"):
            EmbeddingTable.load(str(path))

    def test_import_external_queries(self, tmp_path):
        table = EmbeddingTable(dim=2, kind="query", vectors={"nike shoes": np.array([1.0, 2.0])})
        path = str(tmp_path / "external.tsv")
        table.save(path)
        loaded = import_external_query_embeddings(path)
        assert loaded.kind == "query"
        np.testing.assert_array_equal(loaded["nike shoes"], [1.0, 2.0])

    def test_import_rejects_empty(self, tmp_path):
        path = tmp_path / "empty.tsv"
        path.write_text("dim=2 kind=query\n")
        with pytest.raises(ValueError, match="no vectors"):
            import_external_query_embeddings(str(path))
