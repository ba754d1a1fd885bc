"""Demonstration store: embedder determinism, exact top-k against a
brute-force oracle, tie-breaking, and persistence."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dkg import retrieval
from dkg.retrieval import DemoStore, EmbedderUnavailable, cosine, ngram_embed


# --- embedder ---------------------------------------------------------------

def test_ngram_embed_is_unit_norm_and_deterministic():
    a = ngram_embed("named entity recognition")
    b = ngram_embed("named entity recognition")
    assert a.shape == (retrieval.DEFAULT_DIMENSION,)
    assert np.isclose(np.linalg.norm(a), 1.0)
    assert np.array_equal(a, b)


def test_ngram_embed_is_case_insensitive():
    assert np.array_equal(ngram_embed("Sudoku"), ngram_embed("sudoku"))


def test_ngram_embed_rejects_empty_text():
    with pytest.raises(ValueError):
        ngram_embed("")


def test_similar_texts_score_higher_than_unrelated():
    query = ngram_embed("sentence sentiment classification")
    near = ngram_embed("sentiment classification of sentences")
    far = ngram_embed("sudoku digit grid puzzle")
    assert cosine(query, near) > cosine(query, far)


def test_cosine_bounds():
    v = ngram_embed("anything at all")
    assert np.isclose(cosine(v, v), 1.0)


# --- top_k ------------------------------------------------------------------------

def make_store(vectors, stage="graph_draft", dimension=8):
    store = DemoStore(dimension=dimension)
    for i, vec in enumerate(vectors):
        store.add(f"d{i:03d}", stage, f"task {i}", f"payload {i}",
                  embedding=np.asarray(vec, dtype=np.float64))
    return store


def brute_force(store, query, k, stage):
    matching = [d for d in store.entries if d.stage == stage]
    return sorted(matching, key=lambda d: (-cosine(query, d.embedding), d.id))[:k]


unit_vectors = st.lists(
    st.floats(-1, 1, allow_nan=False), min_size=8, max_size=8
).map(np.asarray).filter(lambda v: np.linalg.norm(v) > 1e-6)


@given(st.lists(unit_vectors, min_size=1, max_size=6), unit_vectors,
       st.integers(1, 6))
def test_top_k_matches_brute_force(vectors, query, k):
    store = make_store(vectors)
    got = store.top_k(query, k, "graph_draft")
    assert [d.id for d in got] == [d.id for d in brute_force(store, query, k,
                                                             "graph_draft")]


def test_top_k_breaks_ties_by_ascending_id():
    same = np.ones(8)
    store = make_store([same, same, same])
    got = store.top_k(np.ones(8), 2, "graph_draft")
    assert [d.id for d in got] == ["d000", "d001"]


def test_top_k_filters_by_stage():
    store = DemoStore(dimension=8)
    store.add("x", "fol_draft", "t", "p", embedding=np.ones(8))
    store.add("y", "graph_draft", "t", "p", embedding=np.ones(8))
    got = store.top_k(np.ones(8), 4, "graph_draft")
    assert [d.id for d in got] == ["y"]


def test_top_k_validates_arguments():
    store = make_store([np.ones(8)])
    with pytest.raises(ValueError):
        store.top_k(np.ones(8), 0, "graph_draft")
    with pytest.raises(ValueError):
        store.top_k(np.ones(4), 1, "graph_draft")


def test_add_rejects_wrong_dimension():
    store = DemoStore(dimension=8)
    with pytest.raises(ValueError):
        store.add("x", "s", "t", "p", embedding=np.ones(4))


# --- persistence --------------------------------------------------------------------

def test_save_load_round_trip(tmp_path):
    store = DemoStore(dimension=16)
    store.add("nli", "graph_draft", "natural language inference", "graph nli { }")
    store.add("ner", "graph_draft", "entity recognition", "graph ner { }")
    path = tmp_path / "store.jsonl"
    store.save(path)
    loaded = DemoStore.load(path)
    assert loaded.dimension == 16
    assert [d.id for d in loaded.entries] == ["nli", "ner"]
    for orig, back in zip(store.entries, loaded.entries):
        assert back.payload == orig.payload
        # float32 storage keeps cosine ordering intact
        assert cosine(orig.embedding, back.embedding) > 0.999999


def test_load_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text("not a store\n", encoding="utf-8")
    with pytest.raises(ValueError):
        DemoStore.load(path)


def test_store_header_format(tmp_path):
    store = DemoStore(dimension=32)
    path = tmp_path / "store.jsonl"
    store.save(path)
    header = path.read_text(encoding="utf-8").splitlines()[0]
    assert header == "dkg-demo-store v1 dim=32 embedder=ngram"


def test_unknown_embedder_is_unavailable():
    store = DemoStore(embedder="remote-service")
    with pytest.raises(EmbedderUnavailable):
        store.embed("anything")


def test_bundled_store_loads(demo_store_path):
    store = DemoStore.load(demo_store_path)
    assert store.dimension == retrieval.DEFAULT_DIMENSION
    stages = {d.stage for d in store.entries}
    assert {"task_description", "concept_list", "graph_draft", "fol_draft"} <= stages
