"""Text embedding providers: a deterministic hashed n-gram embedder and an HTTP client.

The HTTP client speaks the OpenAI-style ``/embeddings`` protocol:
request ``{"model": str, "input": [str]}``, response
``{"data": [{"index": int, "embedding": [float]}]}``.
"""

from __future__ import annotations

import enum
import logging
import math
import os
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import httpx
import numpy as np

from .errors import ConfigError, DimensionMismatch, HttpError
from .textproc import normalize

log = logging.getLogger(__name__)

FNV64_OFFSET = 14695981039346656037
FNV64_PRIME = 1099511628211
_MASK64 = (1 << 64) - 1


def fnv1a_64(data: bytes) -> int:
    h = FNV64_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV64_PRIME) & _MASK64
    return h


class ProviderKind(str, enum.Enum):
    LOCAL_HASH = "local"
    HTTP = "http"


@dataclass(frozen=True)
class ProviderConfig:
    kind: ProviderKind = ProviderKind.LOCAL_HASH
    dimension: int = 1024
    base_url: str | None = None
    model_name: str | None = None
    batch_size: int = 32
    max_retries: int = 3
    timeout: float = 30.0
    max_concurrency: int = 4
    backoff_base: float = 0.5
    api_key_env: str = "EMBED_API_KEY"
    ngram_max: int = 3

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ProviderKind(self.kind))
        if self.kind is ProviderKind.HTTP and not self.base_url:
            raise ConfigError("http embedding provider requires base_url")
        if self.kind is ProviderKind.LOCAL_HASH and self.dimension <= 0:
            raise ConfigError("local embedding provider requires dimension > 0")
        if self.batch_size < 1 or self.max_retries < 0 or self.max_concurrency < 1:
            raise ConfigError("batch_size and max_concurrency must be >= 1, max_retries >= 0")

    @property
    def provider_id(self) -> str:
        if self.kind is ProviderKind.LOCAL_HASH:
            return f"localhash-d{self.dimension}-n{self.ngram_max}"
        return f"http:{self.model_name or 'default'}"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d


@dataclass(frozen=True, eq=False)
class EmbeddingVector:
    values: np.ndarray
    provider_id: str

    def __len__(self) -> int:
        return len(self.values)


def local_hash_embedding(text: str, dimension: int = 1024, ngram_max: int = 3) -> np.ndarray:
    """Bag of character 1..ngram_max-grams of the normalized text, FNV-1a bucketed, L2-normalized."""
    s = normalize(text).normalized
    counts = np.zeros(dimension, dtype=np.float64)
    for n in range(1, ngram_max + 1):
        for i in range(len(s) - n + 1):
            counts[fnv1a_64(s[i : i + n].encode("utf-8")) % dimension] += 1.0
    norm = math.sqrt(math.fsum(counts * counts))
    if norm > 0:
        counts /= norm
    counts.setflags(write=False)
    return counts


def _unit_scale(v: np.ndarray) -> np.ndarray:
    # power-of-two rescale is exact and keeps xx * yy clear of under/overflow
    peak = float(np.max(np.abs(v))) if len(v) else 0.0
    if peak == 0.0:
        return v
    return np.ldexp(v, -math.frexp(peak)[1])


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Exactly-rounded cosine similarity; zero when either vector is zero.

    ``cosine(v, v)`` is exactly 1.0 for any non-zero ``v``.
    """
    if len(a) != len(b):
        raise DimensionMismatch(f"vector dimensions differ: {len(a)} vs {len(b)}")
    if a.provider_id != b.provider_id:
        raise DimensionMismatch(f"vectors come from different providers: {a.provider_id} vs {b.provider_id}")
    x, y = _unit_scale(a.values), _unit_scale(b.values)
    xx = math.fsum(x * x)
    yy = math.fsum(y * y)
    if xx == 0.0 or yy == 0.0:
        return 0.0
    value = math.fsum(x * y) / math.sqrt(xx * yy)
    return min(1.0, max(-1.0, value))


# ---------------------------------------------------------------------------
# HTTP provider

_RETRYABLE = {408, 409, 425, 429, 500, 502, 503, 504}


def _post_batch(
    client: httpx.Client,
    cfg: ProviderConfig,
    batch: list[str],
    headers: dict[str, str],
    sleep: Callable[[float], None],
) -> list[list[float]]:
    url = cfg.base_url.rstrip("/") + "/embeddings"
    payload = {"model": cfg.model_name, "input": batch}
    attempts = cfg.max_retries + 1
    for attempt in range(1, attempts + 1):
        status = None
        try:
            resp = client.post(url, json=payload, headers=headers, timeout=cfg.timeout)
            status = resp.status_code
            if status == 200:
                return _parse_response(resp.json(), len(batch))
            detail = resp.text[:200]
            if status not in _RETRYABLE:
                raise HttpError(status, attempt, detail)
        except httpx.TransportError as exc:
            detail = repr(exc)
        if attempt == attempts:
            raise HttpError(status, attempt, detail)
        delay = cfg.backoff_base * (2 ** (attempt - 1))
        log.warning("embedding request failed (status=%s), retry %d in %.2fs", status, attempt, delay)
        sleep(delay)
    raise AssertionError("unreachable")


def _parse_response(body: dict, expected: int) -> list[list[float]]:
    try:
        rows = sorted(body["data"], key=lambda r: r["index"])
        vectors = [list(map(float, r["embedding"])) for r in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise HttpError(200, 0, f"malformed embedding response: {exc!r}") from None
    if len(vectors) != expected:
        raise DimensionMismatch(f"service returned {len(vectors)} embeddings for {expected} inputs")
    return vectors


def _embed_http(
    texts: Sequence[str],
    cfg: ProviderConfig,
    transport: httpx.BaseTransport | None,
    sleep: Callable[[float], None],
) -> list[EmbeddingVector]:
    headers = {}
    key = os.environ.get(cfg.api_key_env)
    if key:
        headers["Authorization"] = f"Bearer {key}"
    batches = [list(texts[i : i + cfg.batch_size]) for i in range(0, len(texts), cfg.batch_size)]
    with httpx.Client(transport=transport) as client:
        with ThreadPoolExecutor(max_workers=min(cfg.max_concurrency, len(batches))) as pool:
            results = list(pool.map(lambda b: _post_batch(client, cfg, b, headers, sleep), batches))
    flat = [v for batch in results for v in batch]
    dims = {len(v) for v in flat}
    if len(dims) != 1:
        raise DimensionMismatch(f"inconsistent embedding lengths from service: {sorted(dims)}")
    pid = cfg.provider_id
    return [EmbeddingVector(np.asarray(v, dtype=np.float64), pid) for v in flat]


def embed_texts(
    texts: Sequence[str],
    cfg: ProviderConfig | None = None,
    *,
    transport: httpx.BaseTransport | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> list[EmbeddingVector]:
    """One vector per input text, in input order."""
    cfg = cfg or ProviderConfig()
    if not texts:
        return []
    if cfg.kind is ProviderKind.HTTP:
        return _embed_http(texts, cfg, transport, sleep)
    pid = cfg.provider_id
    return [EmbeddingVector(local_hash_embedding(t, cfg.dimension, cfg.ngram_max), pid) for t in texts]
