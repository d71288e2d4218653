"""Text-embedding providers and vector math.

The default provider is a deterministic feature-hashing embedder so the
whole pipeline runs offline and reproducibly.  A remote HTTP provider
and a precomputed vector-file provider are available for replaying
experiments against real encoders.
"""

from __future__ import annotations

import hashlib
import logging
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

log = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class DimensionMismatch(ValueError):
    pass


class ProviderUnavailable(RuntimeError):
    pass


class EmbeddingProvider(Protocol):
    name: str
    dimension: int
    deterministic: bool

    def embed(self, text: str) -> np.ndarray: ...

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]: ...


def _bucket(token: str, dim: int) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8, person=b"bucket").digest()
    return int.from_bytes(digest, "big") % dim


def _sign(token: str) -> float:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=1, person=b"sign").digest()
    return 1.0 if digest[0] & 1 else -1.0


def hash_embed(text: str, dim: int = 256) -> np.ndarray:
    """Feature-hash lowercase word tokens into a unit vector.

    Buckets and signs come from BLAKE2b digests of the token bytes, so the
    output is identical across runs, platforms, and Python versions.
    """
    if dim < 8:
        raise ValueError(f"dimension must be at least 8, got {dim}")
    vec = np.zeros(dim, dtype=np.float64)
    tokens = _TOKEN_RE.findall(text.lower())
    if not tokens:
        if text.strip():
            log.warning("no tokens in %r, returning zero vector", text)
        return vec
    for token in tokens:
        vec[_bucket(token, dim)] += _sign(token)
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; 0.0 when either vector has zero norm."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"vector shapes differ: {a.shape} vs {b.shape}")
    norm_a = np.linalg.norm(a)
    norm_b = np.linalg.norm(b)
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return float(np.dot(a, b) / (norm_a * norm_b))


def embed(provider: EmbeddingProvider, text: str) -> np.ndarray:
    """Embed via a provider; empty text maps to the zero vector with a warning."""
    if not text.strip():
        log.warning("embedding empty text, returning zero vector")
        return np.zeros(provider.dimension, dtype=np.float64)
    vec = provider.embed(text)
    if vec.shape != (provider.dimension,):
        raise DimensionMismatch(
            f"provider {provider.name} declared dimension {provider.dimension} but returned {vec.shape}"
        )
    return vec


@dataclass
class HashEmbedder:
    """Offline deterministic provider backed by hash_embed."""

    dimension: int = 256
    name: str = "hash"
    deterministic: bool = True

    def embed(self, text: str) -> np.ndarray:
        if not text.strip():
            log.warning("embedding empty text, returning zero vector")
            return np.zeros(self.dimension, dtype=np.float64)
        return hash_embed(text, self.dimension)

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [self.embed(t) for t in texts]


@dataclass
class VectorFileEmbedder:
    """Provider replaying precomputed vectors from a tab-separated file.

    One record per line: ``text<TAB>v1,v2,...,vd``.  Lookups for unknown
    text fall back to the zero vector with a warning.
    """

    path: Path
    name: str = "vector-file"
    deterministic: bool = True
    dimension: int = field(init=False, default=0)
    _table: dict[str, np.ndarray] = field(init=False, default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self.path = Path(self.path)
        for line_no, line in enumerate(self.path.read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                text, values = line.split("\t", 1)
                vec = np.array([float(v) for v in values.split(",")], dtype=np.float64)
            except ValueError as exc:
                raise ValueError(f"{self.path}:{line_no}: bad vector record") from exc
            if self.dimension == 0:
                self.dimension = len(vec)
            elif len(vec) != self.dimension:
                raise DimensionMismatch(f"{self.path}:{line_no}: expected {self.dimension} values, got {len(vec)}")
            self._table[text] = vec
        if self.dimension == 0:
            raise ValueError(f"{self.path}: no vectors loaded")

    def embed(self, text: str) -> np.ndarray:
        vec = self._table.get(text)
        if vec is None:
            log.warning("no precomputed vector for %r, returning zero vector", text)
            return np.zeros(self.dimension, dtype=np.float64)
        return vec

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [self.embed(t) for t in texts]


@dataclass
class RemoteEmbedder:
    """HTTP provider: POST {model, texts} -> {vectors}.

    The API key is read from the environment at call time; endpoint and
    model come from configuration.
    """

    endpoint: str
    model: str
    dimension: int
    api_key_env: str = "EMBED_API_KEY"
    timeout: float = 30.0
    name: str = "remote"
    deterministic: bool = False

    def embed(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        import requests

        headers = {}
        api_key = os.environ.get(self.api_key_env)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        try:
            response = requests.post(
                self.endpoint,
                json={"model": self.model, "texts": list(texts)},
                headers=headers,
                timeout=self.timeout,
            )
            response.raise_for_status()
            payload = response.json()
        except Exception as exc:
            raise ProviderUnavailable(f"embedding endpoint {self.endpoint} failed: {exc}") from exc
        vectors = payload.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise ProviderUnavailable(f"embedding endpoint returned {len(vectors or [])} vectors for {len(texts)} texts")
        out = []
        for vec in vectors:
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (self.dimension,):
                raise DimensionMismatch(f"expected dimension {self.dimension}, got {arr.shape}")
            out.append(arr)
        return out
