"""Two-stage retrieval: hybrid recall, then hypothesis-guided re-ranking.

Recall casts a wide net from two directions at once: BM25 over whole
documents (expanded to their chunks) and cosine search over chunk
embeddings. The merged pool is then re-ranked against the embedding of a
hypothetical answer to the query, on the reasoning that a passage which
reads like a good answer is worth more than one that merely shares
words with the question.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np

from .answer import PromptKind, PromptTemplates, render_prompt
from .corpus import Chunk, CorpusStore, DEFAULT_MAX_CHUNK_TOKENS
from .errors import GatewayError, UpstreamProtocolError, ValidationError
from .gateway import ChatRequest, EmbeddingRequest, Gateway
from .keyword import DEFAULT_MAX_TERMS, KeywordIndex, extract_keywords
from .vectors import VectorIndex

logger = logging.getLogger(__name__)

# Config fields a caller may override per request.
OVERRIDABLE_FIELDS = frozenset(
    {"n_keyword_docs", "n_vector_chunks", "top_k", "similarity_threshold"}
)


@dataclass(frozen=True)
class RetrievalConfig:
    """Tuning knobs for the recall and re-rank stages."""

    n_keyword_docs: int = 5
    n_vector_chunks: int = 25
    top_k: int = 5
    similarity_threshold: float = 0.5
    max_chunk_tokens: int = DEFAULT_MAX_CHUNK_TOKENS

    def __post_init__(self) -> None:
        for name in ("n_keyword_docs", "n_vector_chunks", "top_k"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ValidationError("%s must be a positive integer" % name)
        if not (
            math.isfinite(self.similarity_threshold)
            and -1.0 <= self.similarity_threshold <= 1.0
        ):
            raise ValidationError("similarity_threshold must lie in [-1, 1]")
        if not isinstance(self.max_chunk_tokens, int) or self.max_chunk_tokens < 16:
            raise ValidationError("max_chunk_tokens must be an integer >= 16")

    def with_overrides(self, overrides: dict | None) -> "RetrievalConfig":
        """A copy with request-level overrides applied.

        Only the query-time knobs may change; unknown keys are an error
        so that a typo cannot silently run with defaults.
        """
        if not overrides:
            return self
        unknown = sorted(set(overrides) - OVERRIDABLE_FIELDS)
        if unknown:
            raise ValidationError(
                "unknown config overrides: %s" % ", ".join(unknown)
            )
        return dataclasses.replace(self, **overrides)


@dataclass
class RetrievalCandidate:
    """One chunk in the recall pool, with provenance and scores."""

    chunk: Chunk
    origin: str  # "keyword", "vector", or "both"
    recall_score: float
    rerank_similarity: float | None = None
    cached_vector: np.ndarray | None = None


class Retriever:
    """Runs recall and re-ranking against the shared corpus and indexes."""

    def __init__(
        self,
        corpus: CorpusStore,
        keyword_index: KeywordIndex,
        vector_index: VectorIndex,
        gateway: Gateway,
        templates: PromptTemplates | None = None,
        max_keyword_terms: int = DEFAULT_MAX_TERMS,
        stopwords: frozenset[str] | None = None,
        hypothesis_temperature: float = 0.0,
    ) -> None:
        self._corpus = corpus
        self._keyword = keyword_index
        self._vectors = vector_index
        self._gateway = gateway
        self.templates = templates or PromptTemplates.load()
        self._max_terms = max_keyword_terms
        self._stopwords = stopwords
        self._hypothesis_temperature = hypothesis_temperature

    def set_vector_index(self, vector_index: VectorIndex) -> None:
        """Swap in a rebuilt vector index (after a reindex)."""
        self._vectors = vector_index

    def recall(
        self, query: str, config: RetrievalConfig
    ) -> tuple[list[RetrievalCandidate], list[str]]:
        """Collect the hybrid candidate pool for ``query``.

        Returns (candidates, warnings). Candidates are deduplicated on
        (doc_id, chunk_index); a chunk found by both paths gets origin
        "both" and keeps its cosine score as recall_score. When embedding
        the query fails, the vector path is skipped and a warning is
        returned instead of an error: keyword-only recall is degraded but
        useful.
        """
        if not query or not query.strip():
            raise ValidationError("query must not be empty")
        warnings: list[str] = []
        pool: dict[tuple[str, int], RetrievalCandidate] = {}

        terms = extract_keywords(query, self._max_terms, self._stopwords)
        if terms:
            for doc_id, score in self._keyword.search(terms, config.n_keyword_docs):
                for chunk in self._corpus.chunks(doc_id):
                    pool[(doc_id, chunk.chunk_index)] = RetrievalCandidate(
                        chunk=chunk, origin="keyword", recall_score=float(score)
                    )

        try:
            [query_vector] = self._gateway.embed(EmbeddingRequest((query,)))
            hits = self._vectors.search(query_vector, config.n_vector_chunks)
        except GatewayError as exc:
            warnings.append(
                "vector recall unavailable, using keyword matches only: %s"
                % exc.message
            )
            hits = []
        for embedded, similarity in hits:
            key = (embedded.doc_id, embedded.chunk_index)
            existing = pool.get(key)
            if existing is not None:
                existing.origin = "both"
                existing.recall_score = float(similarity)
                existing.cached_vector = embedded.vector
                continue
            chunk = self._corpus.chunk(embedded.doc_id, embedded.chunk_index)
            if chunk is None:
                warnings.append(
                    "vector index entry (%s, %d) has no chunk in the corpus"
                    % (embedded.doc_id, embedded.chunk_index)
                )
                continue
            pool[key] = RetrievalCandidate(
                chunk=chunk,
                origin="vector",
                recall_score=float(similarity),
                cached_vector=embedded.vector,
            )
        return list(pool.values()), warnings

    def generate_hypothesis(self, query: str) -> str:
        """Draft a hypothetical answer to the query with no references.

        The draft is never shown to anyone; it exists to be embedded, as
        a richer search probe than the query itself.
        """
        prompt = render_prompt(
            query, [], PromptKind.WITHOUT_REFERENCES, self.templates
        )
        completion = self._gateway.chat(
            ChatRequest.single(
                "hypothesis", prompt, temperature=self._hypothesis_temperature
            )
        )
        if not completion.strip():
            raise UpstreamProtocolError("hypothesis completion is empty")
        return completion

    def rerank(
        self,
        candidates: list[RetrievalCandidate],
        hypothesis: str,
        config: RetrievalConfig,
    ) -> list[RetrievalCandidate]:
        """Order candidates by similarity to the hypothesis embedding.

        Candidates recalled through the vector index reuse their stored
        vectors; the rest are embedded here in one batch together with
        the hypothesis. Survivors clear the similarity threshold and are
        cut to top_k, sorted by similarity descending with
        (doc_id, chunk_index) breaking exact ties.
        """
        if not candidates:
            return []
        missing = [c for c in candidates if c.cached_vector is None]
        texts = (hypothesis,) + tuple(c.chunk.text for c in missing)
        vectors = self._gateway.embed(EmbeddingRequest(texts))
        hypothesis_vec = vectors[0]
        hypothesis_norm = float(np.linalg.norm(hypothesis_vec))
        if hypothesis_norm == 0.0:
            raise UpstreamProtocolError("hypothesis embedding is a zero vector")
        for candidate, vec in zip(missing, vectors[1:]):
            # Quantize exactly like the vector index stores its entries,
            # so a chunk scores the same whichever path recalled it.
            candidate.cached_vector = np.ascontiguousarray(vec.astype(np.float32))

        for candidate in candidates:
            stored = candidate.cached_vector.astype(np.float64)
            stored_norm = float(np.linalg.norm(stored))
            if stored_norm == 0.0:
                # A chunk embedding that vanished at float32 precision has
                # no usable direction; score it below every threshold.
                candidate.rerank_similarity = -1.0
                continue
            candidate.rerank_similarity = float(
                np.dot(stored, hypothesis_vec) / (stored_norm * hypothesis_norm)
            )

        survivors = [
            c
            for c in candidates
            if c.rerank_similarity >= config.similarity_threshold
        ]
        survivors.sort(
            key=lambda c: (
                -c.rerank_similarity,
                c.chunk.doc_id,
                c.chunk.chunk_index,
            )
        )
        return survivors[: config.top_k]
