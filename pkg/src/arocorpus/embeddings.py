"""Sentence-embedding providers and similarity helpers.

Providers turn texts into unit-norm vectors. Three kinds exist:

* ``mock``: deterministic pseudo-random vectors seeded by a hash of the text
  (or of ``key(text)``, so tests can make two different strings collide);
* ``file``: precomputed vectors from a JSON-lines file;
* ``http``: a remote encoder speaking ``{"texts": [...]}`` -> ``{"dim", "embeddings"}``.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import httpx
import numpy as np

from .corpus import nfc

MOCK_DIM = 32
PROVIDER_KINDS = ("http", "file", "mock")


class TransportError(RuntimeError):
    """The remote embedding service failed or answered malformed data."""


class EmbeddingLookupError(LookupError):
    """A file provider has no vector for the requested text."""


@dataclass(frozen=True)
class ProviderConfig:
    kind: str = "mock"
    endpoint: Optional[str] = None
    file_path: Optional[str] = None
    batch_size: int = 64
    timeout: float = 30.0
    retries: int = 2
    max_in_flight: int = 1
    dim: int = MOCK_DIM

    def __post_init__(self):
        if self.kind not in PROVIDER_KINDS:
            raise ValueError(f"unknown provider kind {self.kind!r}")
        if self.kind == "http" and not self.endpoint:
            raise ValueError("http provider needs an endpoint")
        if self.kind == "file" and not self.file_path:
            raise ValueError("file provider needs a file_path")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "ProviderConfig":
        fields = set(cls.__dataclass_fields__)
        unknown = set(data) - fields
        if unknown:
            raise ValueError(f"unknown provider setting {sorted(unknown)[0]!r}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "ProviderConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def normalize_rows(vectors: np.ndarray) -> np.ndarray:
    vectors = np.asarray(vectors, dtype=np.float64)
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise ValueError("cannot normalize a zero vector")
    return vectors / norms


class MockProvider:
    def __init__(self, dim: int = MOCK_DIM, key: Optional[Callable[[str], str]] = None):
        self.dim = dim
        self.key = key or (lambda text: text)

    def vector(self, text: str) -> np.ndarray:
        digest = hashlib.blake2b(self.key(text).encode("utf-8"), digest_size=8).digest()
        rng = np.random.default_rng(int.from_bytes(digest, "little"))
        vec = rng.standard_normal(self.dim)
        return vec / np.linalg.norm(vec)

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        return np.stack([self.vector(t) for t in texts])


class FileProvider:
    def __init__(self, path: str | Path):
        self.table: dict[str, np.ndarray] = {}
        with open(path, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                record = json.loads(line)
                try:
                    text, vec = nfc(record["text"]), record["vec"]
                except KeyError as exc:
                    raise ValueError(f"{path}: line {lineno}: missing {exc.args[0]}") from exc
                self.table[text] = np.asarray(vec, dtype=np.float64)
        dims = {v.shape for v in self.table.values()}
        if len(dims) > 1:
            raise ValueError(f"{path}: vectors of differing dimension")

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        rows = []
        for text in texts:
            try:
                rows.append(self.table[nfc(text)])
            except KeyError:
                raise EmbeddingLookupError(f"no precomputed embedding for text {text!r}") from None
        return normalize_rows(np.stack(rows))


class HttpProvider:
    def __init__(self, cfg: ProviderConfig, transport: Optional[httpx.BaseTransport] = None):
        self.cfg = cfg
        self.transport = transport

    def _post(self, client: httpx.Client, batch: list[str]) -> np.ndarray:
        last_error: Exception | None = None
        for attempt in range(self.cfg.retries + 1):
            if attempt:
                time.sleep(min(0.1 * 2**attempt, 2.0))
            try:
                response = client.post(self.cfg.endpoint, json={"texts": batch})
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if response.status_code != 200:
                last_error = TransportError(f"embedding service answered HTTP {response.status_code}")
                continue
            return self._decode(response, len(batch))
        raise TransportError(f"embedding request failed after {self.cfg.retries + 1} attempts: {last_error}")

    @staticmethod
    def _decode(response: httpx.Response, expected: int) -> np.ndarray:
        try:
            payload = response.json()
            dim = int(payload["dim"])
            rows = payload["embeddings"]
        except (ValueError, KeyError, TypeError) as exc:
            raise TransportError(f"malformed embedding response: {exc}") from exc
        if len(rows) != expected:
            raise TransportError(f"expected {expected} embeddings, got {len(rows)}")
        if any(len(r) != dim for r in rows):
            raise TransportError("embedding dimension does not match declared dim")
        return normalize_rows(np.asarray(rows, dtype=np.float64).reshape(expected, dim))

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        texts = list(texts)
        size = self.cfg.batch_size
        batches = [texts[i : i + size] for i in range(0, len(texts), size)]
        with httpx.Client(timeout=self.cfg.timeout, transport=self.transport) as client:
            if self.cfg.max_in_flight == 1 or len(batches) == 1:
                parts = [self._post(client, b) for b in batches]
            else:
                with ThreadPoolExecutor(max_workers=self.cfg.max_in_flight) as pool:
                    # map() yields in submission order
                    parts = list(pool.map(lambda b: self._post(client, b), batches))
        dims = {p.shape[1] for p in parts}
        if len(dims) > 1:
            raise TransportError("embedding dimension changed between batches")
        return np.concatenate(parts, axis=0)


Provider = Union[MockProvider, FileProvider, HttpProvider]


def make_provider(
    cfg: ProviderConfig,
    key: Optional[Callable[[str], str]] = None,
    transport: Optional[httpx.BaseTransport] = None,
) -> Provider:
    if cfg.kind == "mock":
        return MockProvider(cfg.dim, key)
    if cfg.kind == "file":
        return FileProvider(cfg.file_path)
    return HttpProvider(cfg, transport)


def as_provider(provider: Union[ProviderConfig, Provider]) -> Provider:
    if isinstance(provider, ProviderConfig):
        return make_provider(provider)
    return provider


def embed_batch(provider: Union[ProviderConfig, Provider], texts: Sequence[str]) -> np.ndarray:
    """Embed `texts` into a (len(texts), d) array of unit-norm rows."""
    if len(texts) == 0:
        raise ValueError("nothing to embed")
    vectors = as_provider(provider).embed(list(texts))
    return normalize_rows(vectors)


def similarity_matrix(a, b) -> np.ndarray:
    """Dot products between every row of `a` and every row of `b`."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    return a @ b.T


def matching_accuracy(src, tgt) -> float:
    """Share of rows whose most similar target is the same-index target.

    argmax keeps the first maximum, so a tie with an earlier column counts as a miss.
    """
    src = np.asarray(src, dtype=np.float64)
    tgt = np.asarray(tgt, dtype=np.float64)
    if len(src) == 0:
        raise ValueError("matching accuracy needs at least one pair")
    if len(src) != len(tgt):
        raise ValueError("src and tgt must have the same number of vectors")
    best = np.argmax(similarity_matrix(src, tgt), axis=1)
    return float(np.mean(best == np.arange(len(src))))
