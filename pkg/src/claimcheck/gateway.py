"""Model gateway: one seam between the pipeline and language models.

Every model interaction in the package flows through a Gateway, keyed by
a role name ("hypothesis", "answerer", "judge", "generator") so each
role can point at a different endpoint and model. The HTTP gateway talks
an OpenAI-style chat/embeddings wire format; the mock gateway answers
from scripts and hashes, which makes whole-pipeline runs reproducible
offline.
"""

from __future__ import annotations

import hashlib
import logging
import math
import os
import threading
import time
from collections import Counter, deque
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field

import httpx
import numpy as np

from .errors import (
    ConfigError,
    DeadlineExceededError,
    GatewayError,
    UpstreamProtocolError,
    UpstreamStatusError,
    ValidationError,
)

logger = logging.getLogger(__name__)

KNOWN_ROLES = ("hypothesis", "answerer", "judge", "generator")


@dataclass(frozen=True)
class Message:
    """One prompt message. Only system and user speakers exist here."""

    speaker: str
    content: str

    def __post_init__(self) -> None:
        if self.speaker not in ("system", "user"):
            raise ValidationError("message speaker must be 'system' or 'user'")
        if not isinstance(self.content, str) or not self.content.strip():
            raise ValidationError("message content must be a non-empty string")


@dataclass(frozen=True)
class ChatRequest:
    """A completion request for one configured role."""

    role: str
    messages: tuple[Message, ...]
    max_output_tokens: int = 1024
    temperature: float = 0.0

    def __post_init__(self) -> None:
        if self.role not in KNOWN_ROLES:
            raise ValidationError(
                "unknown gateway role %r (expected one of %s)"
                % (self.role, ", ".join(KNOWN_ROLES))
            )
        if not self.messages:
            raise ValidationError("chat request needs at least one message")
        if self.messages[-1].speaker != "user":
            raise ValidationError("the final chat message must come from the user")
        if self.max_output_tokens < 1:
            raise ValidationError("max_output_tokens must be positive")
        if not (self.temperature >= 0.0 and math.isfinite(self.temperature)):
            raise ValidationError("temperature must be a finite number >= 0")

    @classmethod
    def single(
        cls,
        role: str,
        prompt: str,
        *,
        system: str | None = None,
        max_output_tokens: int = 1024,
        temperature: float = 0.0,
    ) -> "ChatRequest":
        messages: tuple[Message, ...]
        if system is not None:
            messages = (Message("system", system), Message("user", prompt))
        else:
            messages = (Message("user", prompt),)
        return cls(role, messages, max_output_tokens, temperature)


@dataclass(frozen=True)
class EmbeddingRequest:
    """A batch embedding request; texts must carry actual content."""

    texts: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.texts:
            raise ValidationError("embedding request needs at least one text")
        for i, text in enumerate(self.texts):
            if not isinstance(text, str) or not text.strip():
                raise ValidationError("embedding text %d is empty" % i)


class Gateway:
    """Interface both gateway implementations satisfy."""

    @property
    def dimension(self) -> int:
        raise NotImplementedError

    def chat(self, request: ChatRequest) -> str:
        raise NotImplementedError

    def embed(self, request: EmbeddingRequest) -> list[np.ndarray]:
        raise NotImplementedError


@dataclass(frozen=True)
class RoleConfig:
    """Where and how to reach the model serving one role."""

    endpoint: str
    model: str
    api_key_env: str | None = None
    timeout_s: float = 30.0
    max_retries: int = 2
    temperature: float = 0.0

    def __post_init__(self) -> None:
        if not self.endpoint:
            raise ConfigError("role endpoint must be a URL")
        if not self.model:
            raise ConfigError("role model must be named")
        if self.timeout_s <= 0:
            raise ConfigError("timeout_s must be positive")
        if self.max_retries < 0:
            raise ConfigError("max_retries cannot be negative")


class HttpGateway(Gateway):
    """Gateway speaking an OpenAI-compatible HTTP API.

    Transient failures (transport errors, 5xx, 429) are retried with
    exponential backoff up to each role's max_retries, all under one
    total deadline of timeout_s per call: the budget covers every attempt
    together, so a stuck upstream cannot stall a request beyond it. API
    keys are read from the environment at call time and never logged.
    """

    def __init__(
        self,
        roles: Mapping[str, RoleConfig],
        embedding: RoleConfig,
        dimension: int | None = None,
        backoff_s: float = 0.25,
        client: httpx.Client | None = None,
    ) -> None:
        unknown = sorted(set(roles) - set(KNOWN_ROLES))
        if unknown:
            raise ConfigError("unknown gateway roles: %s" % ", ".join(unknown))
        self._roles = dict(roles)
        self._embedding = embedding
        self._dim = int(dimension) if dimension is not None else None
        self._backoff = backoff_s
        self._client = client or httpx.Client()
        self._dim_lock = threading.Lock()
        self._count_lock = threading.Lock()
        self.attempts: Counter[str] = Counter()

    @property
    def dimension(self) -> int:
        """Embedding dimension; probed from the endpoint on first use."""
        with self._dim_lock:
            if self._dim is None:
                self.embed(EmbeddingRequest(("dimension probe",)))
                assert self._dim is not None
            return self._dim

    def _headers(self, cfg: RoleConfig) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if cfg.api_key_env:
            key = os.environ.get(cfg.api_key_env)
            if not key:
                raise ConfigError(
                    "environment variable %s is not set" % cfg.api_key_env
                )
            headers["Authorization"] = "Bearer " + key
        return headers

    def _post(self, cfg: RoleConfig, payload: dict, label: str) -> dict:
        headers = self._headers(cfg)
        deadline = time.monotonic() + cfg.timeout_s
        last_error: GatewayError | None = None
        for attempt in range(cfg.max_retries + 1):
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise DeadlineExceededError(
                    "%s: time budget of %.1fs exhausted after %d attempt(s)"
                    % (label, cfg.timeout_s, attempt)
                )
            with self._count_lock:
                self.attempts[label] += 1
            try:
                response = self._client.post(
                    cfg.endpoint, json=payload, headers=headers, timeout=remaining
                )
            except httpx.HTTPError as exc:
                last_error = GatewayError(
                    "%s: transport failure (%s)" % (label, exc.__class__.__name__)
                )
                logger.warning("%s attempt %d failed: %s", label, attempt + 1, exc)
            else:
                status = response.status_code
                if 200 <= status < 300:
                    try:
                        data = response.json()
                    except ValueError:
                        raise UpstreamProtocolError(
                            "%s: response body is not JSON" % label
                        ) from None
                    if not isinstance(data, dict):
                        raise UpstreamProtocolError(
                            "%s: response JSON is not an object" % label
                        )
                    return data
                if status >= 500 or status == 429:
                    last_error = UpstreamStatusError(
                        "%s: upstream status %d" % (label, status), status=status
                    )
                    logger.warning("%s attempt %d got status %d", label, attempt + 1, status)
                else:
                    raise UpstreamStatusError(
                        "%s: upstream status %d" % (label, status),
                        status=status,
                        detail=response.text[:500],
                    )
            if attempt < cfg.max_retries:
                pause = min(self._backoff * (2 ** attempt), deadline - time.monotonic())
                if pause > 0:
                    time.sleep(pause)
        assert last_error is not None
        raise last_error

    def chat(self, request: ChatRequest) -> str:
        cfg = self._roles.get(request.role)
        if cfg is None:
            raise ConfigError("no endpoint configured for role %r" % request.role)
        payload = {
            "model": cfg.model,
            "messages": [
                {"role": m.speaker, "content": m.content} for m in request.messages
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        data = self._post(cfg, payload, "chat/" + request.role)
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise UpstreamProtocolError(
                "chat/%s: malformed completion payload" % request.role
            ) from None
        if not isinstance(content, str) or not content.strip():
            raise UpstreamProtocolError(
                "chat/%s: completion content is empty" % request.role
            )
        return content

    def embed(self, request: EmbeddingRequest) -> list[np.ndarray]:
        cfg = self._embedding
        payload = {"model": cfg.model, "input": list(request.texts)}
        data = self._post(cfg, payload, "embed")
        items = data.get("data")
        if not isinstance(items, list):
            raise UpstreamProtocolError("embed: response has no data list")
        if len(items) != len(request.texts):
            raise UpstreamProtocolError(
                "embed: got %d embeddings for %d texts"
                % (len(items), len(request.texts))
            )
        ordered: list[np.ndarray | None] = [None] * len(items)
        for position, item in enumerate(items):
            if not isinstance(item, dict) or "embedding" not in item:
                raise UpstreamProtocolError("embed: malformed embedding item")
            index = item.get("index", position)
            if not isinstance(index, int) or not 0 <= index < len(items):
                raise UpstreamProtocolError("embed: item index out of range")
            try:
                vec = np.asarray(item["embedding"], dtype=np.float64)
            except (TypeError, ValueError):
                raise UpstreamProtocolError("embed: embedding is not numeric") from None
            if vec.ndim != 1 or vec.shape[0] == 0:
                raise UpstreamProtocolError("embed: embedding has a bad shape")
            if not np.all(np.isfinite(vec)):
                raise UpstreamProtocolError("embed: embedding has non-finite values")
            if ordered[index] is not None:
                raise UpstreamProtocolError("embed: duplicate item index %d" % index)
            ordered[index] = vec
        vectors = [v for v in ordered if v is not None]
        if len(vectors) != len(items):
            raise UpstreamProtocolError("embed: missing item indexes")
        dims = {v.shape[0] for v in vectors}
        if len(dims) != 1:
            raise UpstreamProtocolError(
                "embed: inconsistent dimensions in one batch: %s" % sorted(dims)
            )
        dim = vectors[0].shape[0]
        if self._dim is None:
            self._dim = int(dim)
        elif dim != self._dim:
            raise UpstreamProtocolError(
                "embed: dimension changed from %d to %d" % (self._dim, dim)
            )
        return vectors


def _hash_unit_vector(text: str, dimension: int) -> np.ndarray:
    """Map text to a unit vector, deterministically across platforms.

    SHA-256 of the text seeds a counter-mode byte stream; 8-byte windows
    become floats in [-1, 1) which are then normalized. Equal texts give
    equal vectors, different texts give (nearly orthogonal) random ones.
    """
    seed = hashlib.sha256(text.encode("utf-8")).digest()
    needed = dimension * 8
    blocks = []
    counter = 0
    while sum(len(b) for b in blocks) < needed:
        blocks.append(
            hashlib.sha256(seed + counter.to_bytes(4, "little")).digest()
        )
        counter += 1
    raw = b"".join(blocks)[:needed]
    ints = np.frombuffer(raw, dtype="<u8")
    values = ints.astype(np.float64) / float(2**63) - 1.0
    norm = float(np.linalg.norm(values))
    if norm == 0.0:  # not reachable in practice; keep the contract anyway
        values = np.zeros(dimension)
        values[0] = 1.0
        return values
    return values / norm


def _default_reply(role: str, request: ChatRequest) -> str:
    tail = request.messages[-1].content[:120]
    if role == "hypothesis":
        return "A plausible reference passage: " + tail
    if role == "answerer":
        return (
            "[Conclusion] Not related to health information\n"
            "[Analysis] No scripted reply was configured for this input: " + tail
        )
    if role == "judge":
        return (
            '{"Relevance Score": "5", "Reliability Score": "5", '
            '"Richness Score": "5"}'
        )
    return (
        "[Rumor Title] Placeholder title SEPCODE [Rumor Content] "
        "Placeholder content derived from: " + tail + " SEPCODE "
        "[Keywords] placeholder,content"
    )


@dataclass
class MockGateway(Gateway):
    """Deterministic stand-in gateway.

    Chat replies come from per-role scripts (consumed FIFO), a per-role
    callable, or a safe default; embeddings are hash-derived unit vectors,
    so identical texts always embed identically. Failures can be injected
    per call site to exercise the degraded paths.
    """

    dim: int = 64
    scripts: dict[str, deque] = field(default_factory=dict)
    responders: dict[str, Callable[[ChatRequest], str]] = field(default_factory=dict)
    chat_calls: list[ChatRequest] = field(default_factory=list)
    embed_calls: list[tuple[str, ...]] = field(default_factory=list)
    fail_embed: Exception | None = None
    fail_chat: dict[str, Exception] = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return self.dim

    def script(self, role: str, *replies: str) -> "MockGateway":
        self.scripts.setdefault(role, deque()).extend(replies)
        return self

    def respond_with(self, role: str, fn: Callable[[ChatRequest], str]) -> "MockGateway":
        self.responders[role] = fn
        return self

    def chat(self, request: ChatRequest) -> str:
        self.chat_calls.append(request)
        failure = self.fail_chat.get(request.role)
        if failure is not None:
            raise failure
        queue = self.scripts.get(request.role)
        if queue:
            return queue.popleft()
        responder = self.responders.get(request.role)
        if responder is not None:
            return responder(request)
        return _default_reply(request.role, request)

    def embed(self, request: EmbeddingRequest) -> list[np.ndarray]:
        self.embed_calls.append(request.texts)
        if self.fail_embed is not None:
            raise self.fail_embed
        return [_hash_unit_vector(t, self.dim) for t in request.texts]


def batched(items: Sequence, size: int) -> list[Sequence]:
    """Split a sequence into consecutive slices of at most ``size``."""
    if size < 1:
        raise ValidationError("batch size must be positive")
    return [items[i : i + size] for i in range(0, len(items), size)]
