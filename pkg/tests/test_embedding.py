from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskgraph.embedding import (
    DimensionMismatch,
    HashEmbedder,
    ProviderUnavailable,
    RemoteEmbedder,
    VectorFileEmbedder,
    cosine,
    embed,
    hash_embed,
)


def test_hash_embed_deterministic():
    a = hash_embed("lithium", 256)
    b = hash_embed("lithium", 256)
    assert np.array_equal(a, b)


def test_hash_embed_repeated_token_same_direction():
    once = hash_embed("a", 64)
    twice = hash_embed("a a", 64)
    assert np.allclose(once, twice)


def test_hash_embed_case_folding():
    assert np.array_equal(hash_embed("Lithium", 128), hash_embed("lithium", 128))


def test_hash_embed_unit_norm():
    vec = hash_embed("cobalt mining in congo", 256)
    assert abs(np.linalg.norm(vec) - 1.0) < 1e-12


def test_hash_embed_min_dimension():
    with pytest.raises(ValueError):
        hash_embed("x", 4)


def test_disjoint_tokens_near_orthogonal():
    dim = 4096
    left_tokens = ["alpha", "beta", "gamma"]
    right_tokens = ["delta", "epsilon", "zeta"]
    # verify no bucket collisions first, so cosine must be exactly 0
    from riskgraph.embedding import _bucket

    left_buckets = {_bucket(t, dim) for t in left_tokens}
    right_buckets = {_bucket(t, dim) for t in right_tokens}
    assert not (left_buckets & right_buckets)
    cos = cosine(hash_embed(" ".join(left_tokens), dim), hash_embed(" ".join(right_tokens), dim))
    assert abs(cos) < 0.05


def test_cosine_identity_and_orthogonal():
    v = np.array([0.3, 0.4, 1.2])
    assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)
    assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0


def test_cosine_closed_form():
    assert cosine(np.array([1.0, 1.0]), np.array([1.0, 0.0])) == pytest.approx(1 / np.sqrt(2))


def test_cosine_zero_vector():
    assert cosine(np.zeros(3), np.ones(3)) == 0.0


def test_cosine_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        cosine(np.ones(3), np.ones(4))


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.lists(st.floats(-5, 5), min_size=3, max_size=3))
@settings(max_examples=100, deadline=None)
def test_cosine_symmetric_and_bounded(a, b):
    va, vb = np.array(a), np.array(b)
    assert cosine(va, vb) == cosine(vb, va)
    assert abs(cosine(va, vb)) <= 1 + 1e-12


def test_embed_empty_text_is_zero():
    provider = HashEmbedder(dimension=64)
    assert np.array_equal(embed(provider, "   "), np.zeros(64))


def test_provider_determinism_over_corpus():
    provider = HashEmbedder(dimension=32)
    corpus = [f"event {i} about {word}" for i, word in enumerate(["tariffs", "floods", "strikes"]) for _ in range(5)]
    baseline = [provider.embed(t).tobytes() for t in corpus]
    for _ in range(10):
        assert [provider.embed(t).tobytes() for t in corpus] == baseline


def test_vector_file_provider(tmp_path):
    path = tmp_path / "vectors.tsv"
    path.write_text("cobalt\t1.0,0.0,0.0\nnickel\t0.0,1.0,0.0\n", encoding="utf-8")
    provider = VectorFileEmbedder(path=path)
    assert provider.dimension == 3
    assert np.array_equal(provider.embed("cobalt"), np.array([1.0, 0.0, 0.0]))
    assert np.array_equal(provider.embed("unknown"), np.zeros(3))


def test_vector_file_dimension_mismatch(tmp_path):
    path = tmp_path / "vectors.tsv"
    path.write_text("a\t1.0,0.0\nb\t1.0\n", encoding="utf-8")
    with pytest.raises(DimensionMismatch):
        VectorFileEmbedder(path=path)


def test_remote_provider_dead_endpoint():
    provider = RemoteEmbedder(endpoint="http://127.0.0.1:9", model="m", dimension=8, timeout=0.2)
    with pytest.raises(ProviderUnavailable):
        provider.embed("cobalt mining")


def test_remote_provider_wrong_dimension(monkeypatch):
    provider = RemoteEmbedder(endpoint="http://example.invalid/embed", model="m", dimension=4)

    class FakeResponse:
        status_code = 200

        def raise_for_status(self):
            return None

        def json(self):
            return {"vectors": [[1.0, 2.0]]}

    monkeypatch.setattr("requests.post", lambda *a, **k: FakeResponse())
    with pytest.raises(DimensionMismatch):
        provider.embed("text")


def test_remote_provider_preserves_order(monkeypatch):
    provider = RemoteEmbedder(endpoint="http://example.invalid/embed", model="m", dimension=2)

    class FakeResponse:
        status_code = 200

        def __init__(self, payload):
            self._payload = payload

        def raise_for_status(self):
            return None

        def json(self):
            return self._payload

    def fake_post(url, json=None, headers=None, timeout=None):
        vectors = [[float(i), 0.0] for i in range(len(json["texts"]))]
        return FakeResponse({"vectors": vectors})

    monkeypatch.setattr("requests.post", fake_post)
    out = provider.embed_batch(["a", "b", "c"])
    assert [v[0] for v in out] == [0.0, 1.0, 2.0]
