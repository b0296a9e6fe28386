"""The detection pipeline end to end, plus runtime assembly.

Detector.detect() is the one call the HTTP API, the CLI, and the
evaluation harness all share: validate the query, recall candidates,
draft and embed a hypothetical answer, re-rank, and generate a cited
verdict — falling back to an uncited answer whenever retrieval comes up
empty or loses its embedding support mid-flight.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from .answer import AnswerEngine, PromptKind, PromptTemplates, ReferenceChunk, Verdict
from .config import AppConfig
from .corpus import CorpusStore, IngestSummary
from .errors import GatewayError, ValidationError
from .gateway import (
    EmbeddingRequest,
    Gateway,
    HttpGateway,
    MockGateway,
    batched,
)
from .keyword import KeywordIndex
from .retrieval import RetrievalCandidate, RetrievalConfig, Retriever
from .text import estimate_tokens, load_stopwords
from .vectors import VectorIndex

logger = logging.getLogger(__name__)

DEFAULT_MAX_QUERY_TOKENS = 4000
_EMBED_BATCH = 64

VECTOR_SNAPSHOT_NAME = "vectors.bin"


@dataclass
class StageTimings:
    """Wall-clock milliseconds spent per pipeline stage (0.0 if skipped)."""

    recall_ms: float = 0.0
    hypothesis_ms: float = 0.0
    rerank_ms: float = 0.0
    generation_ms: float = 0.0

    def as_dict(self) -> dict:
        return {
            "recall_ms": self.recall_ms,
            "hypothesis_ms": self.hypothesis_ms,
            "rerank_ms": self.rerank_ms,
            "generation_ms": self.generation_ms,
        }


@dataclass
class DetectResult:
    """Everything one detection run produced."""

    verdict: Verdict
    used_references: bool
    timings: StageTimings
    degraded: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict.as_dict(),
            "used_references": self.used_references,
            "timings_ms": self.timings.as_dict(),
            "degraded": list(self.degraded),
        }


class Detector:
    """Runs the full verification pipeline for one claim at a time."""

    def __init__(
        self,
        corpus: CorpusStore,
        retriever: Retriever,
        answer_engine: AnswerEngine,
        base_config: RetrievalConfig | None = None,
        max_query_tokens: int = DEFAULT_MAX_QUERY_TOKENS,
    ) -> None:
        self._corpus = corpus
        self._retriever = retriever
        self._engine = answer_engine
        self.base_config = base_config or RetrievalConfig()
        self._max_query_tokens = max_query_tokens

    def _reference_chunk(self, candidate: RetrievalCandidate) -> ReferenceChunk:
        doc = self._corpus.document(candidate.chunk.doc_id)
        if doc is None:  # indexes out of sync; fail loudly
            raise ValidationError(
                "candidate document %s missing from corpus" % candidate.chunk.doc_id
            )
        return ReferenceChunk(
            doc_id=candidate.chunk.doc_id,
            chunk_index=candidate.chunk.chunk_index,
            text=candidate.chunk.text,
            title=doc.title,
            source_name=doc.source_name,
            url=doc.url,
            published_date=doc.published_date,
        )

    def detect(self, query: str, overrides: dict | None = None) -> DetectResult:
        """Verify one claim.

        Raises ValidationError for an unusable query or overrides; gateway
        failures in the answering stage propagate as typed errors, while
        failures confined to retrieval degrade to an uncited answer.
        """
        cleaned = (query or "").strip()
        if not cleaned:
            raise ValidationError("query must not be empty", code="empty_query")
        query_tokens = estimate_tokens(cleaned)
        if query_tokens > self._max_query_tokens:
            raise ValidationError(
                "query is about %d tokens, over the limit of %d"
                % (query_tokens, self._max_query_tokens),
                code="query_too_long",
            )
        config = self.base_config.with_overrides(overrides)

        timings = StageTimings()
        degraded: list[str] = []

        start = time.perf_counter()
        candidates, recall_warnings = self._retriever.recall(cleaned, config)
        timings.recall_ms = (time.perf_counter() - start) * 1000.0
        degraded.extend(recall_warnings)

        survivors: list[RetrievalCandidate] = []
        if candidates:
            try:
                start = time.perf_counter()
                hypothesis = self._retriever.generate_hypothesis(cleaned)
                timings.hypothesis_ms = (time.perf_counter() - start) * 1000.0

                start = time.perf_counter()
                survivors = self._retriever.rerank(candidates, hypothesis, config)
                timings.rerank_ms = (time.perf_counter() - start) * 1000.0
            except GatewayError as exc:
                degraded.append(
                    "re-ranking unavailable, answering without references: %s"
                    % exc.message
                )
                survivors = []

        start = time.perf_counter()
        if survivors:
            references = [self._reference_chunk(c) for c in survivors]
            verdict = self._engine.answer(
                cleaned, references, PromptKind.WITH_REFERENCES
            )
            used_references = True
        else:
            verdict = self._engine.answer(cleaned, [], PromptKind.WITHOUT_REFERENCES)
            used_references = False
        timings.generation_ms = (time.perf_counter() - start) * 1000.0

        return DetectResult(verdict, used_references, timings, degraded)


class Runtime:
    """Everything the CLI and the HTTP service share, wired together.

    Construction loads persisted state when a data directory is
    configured: the corpus replays its document log, the keyword index is
    rebuilt from it (cheap, and immune to tokenizer drift), and the
    vector index loads its snapshot when one exists.
    """

    def __init__(self, config: AppConfig | None = None) -> None:
        self.config = config or AppConfig()
        paths = self.config.paths

        self.gateway = self._build_gateway()
        self.corpus = CorpusStore(
            data_dir=paths.data_dir,
            max_chunk_tokens=self.config.retrieval.max_chunk_tokens,
        )

        self.vector_path: Path | None = None
        if paths.data_dir is not None:
            self.vector_path = Path(paths.data_dir) / VECTOR_SNAPSHOT_NAME
        if self.vector_path is not None and self.vector_path.is_file():
            self.vectors = VectorIndex.load(self.vector_path)
        else:
            self.vectors = VectorIndex(self.gateway.dimension)
            if self.corpus.chunk_count:
                logger.warning(
                    "corpus has %d chunks but no vector snapshot; "
                    "vector recall is empty until reindex or new ingestion",
                    self.corpus.chunk_count,
                )

        self.keywords = KeywordIndex()
        for doc in self.corpus.documents():
            self.keywords.add_document(doc.doc_id, doc.title + "\n" + doc.body)

        templates = PromptTemplates.load(paths.templates_dir)
        stopwords = (
            load_stopwords(paths.stopwords) if paths.stopwords is not None else None
        )
        roles = self.config.gateway.roles
        self.retriever = Retriever(
            self.corpus,
            self.keywords,
            self.vectors,
            self.gateway,
            templates=templates,
            stopwords=stopwords,
            hypothesis_temperature=(
                roles["hypothesis"].temperature if "hypothesis" in roles else 0.0
            ),
        )
        self.answer_engine = AnswerEngine(
            self.gateway,
            templates,
            temperature=(
                roles["answerer"].temperature if "answerer" in roles else 0.0
            ),
        )
        self.detector = Detector(
            self.corpus,
            self.retriever,
            self.answer_engine,
            base_config=self.config.retrieval,
            max_query_tokens=self.config.service.max_query_tokens,
        )
        self.corpus.subscribe(self._index_document)

    def _build_gateway(self) -> Gateway:
        cfg = self.config.gateway
        if cfg.type == "mock":
            return MockGateway(dim=cfg.dimension or 64)
        assert cfg.embedding is not None  # enforced by GatewayConfig
        return HttpGateway(
            roles=cfg.roles,
            embedding=cfg.embedding,
            dimension=cfg.dimension,
            backoff_s=cfg.backoff_s,
        )

    def _index_document(self, doc, chunks) -> None:
        self.keywords.add_document(doc.doc_id, doc.title + "\n" + doc.body)
        for batch in batched(chunks, _EMBED_BATCH):
            vectors = self.gateway.embed(
                EmbeddingRequest(tuple(c.text for c in batch))
            )
            self.vectors.insert(
                [
                    (c.doc_id, c.chunk_index, v)
                    for c, v in zip(batch, vectors)
                ]
            )

    def save_vectors(self) -> None:
        if self.vector_path is not None:
            self.vectors.save(self.vector_path)

    def ingest_file(self, path: str) -> IngestSummary:
        summary = self.corpus.ingest_file(path)
        self.save_vectors()
        return summary

    def ingest_text(self, text: str) -> IngestSummary:
        summary = self.corpus.ingest_text(text)
        self.save_vectors()
        return summary

    def reindex_vectors(self) -> int:
        """Re-embed every chunk into a fresh index and rewrite the
        snapshot. Returns the number of chunks embedded."""
        chunks = self.corpus.all_chunks()
        index = VectorIndex(self.gateway.dimension)
        total = 0
        for batch in batched(chunks, _EMBED_BATCH):
            vectors = self.gateway.embed(
                EmbeddingRequest(tuple(c.text for c in batch))
            )
            total += index.insert(
                [(c.doc_id, c.chunk_index, v) for c, v in zip(batch, vectors)]
            )
        self.vectors = index
        self.retriever.set_vector_index(index)
        self.save_vectors()
        return total
