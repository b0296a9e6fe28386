"""Document corpus: validation, chunking, and the shared store.

Documents are immutable once ingested and identified by a content hash,
so re-ingesting the same material is a no-op. Chunking is sentence-aware
with a token budget; every document yields at least one chunk and the
chunks concatenate back to the body up to whitespace.

The store supports concurrent readers with exclusive writers, and can
persist itself as an append-only JSONL log next to a small meta file.
"""

from __future__ import annotations

import datetime
import hashlib
import json
import logging
import threading
from collections.abc import Callable, Iterable, Iterator
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ClaimcheckError, ValidationError
from .text import estimate_tokens, is_cjk_char, split_sentences

logger = logging.getLogger(__name__)

MIN_CHUNK_TOKENS = 16
DEFAULT_MAX_CHUNK_TOKENS = 512

_META_FORMAT = 1


@dataclass(frozen=True)
class Document:
    """One reference document. Construct through :func:`make_document`."""

    doc_id: str
    title: str
    body: str
    source_name: str
    published_date: datetime.date | None = None
    url: str | None = None


@dataclass(frozen=True)
class Chunk:
    """A contiguous piece of a document body, within the token budget."""

    doc_id: str
    chunk_index: int
    text: str
    token_count: int


def compute_doc_id(title: str, body: str, url: str | None) -> str:
    """Stable content-derived identifier.

    Hashing (title, body, url) means identical material collides on
    purpose: ingestion treats the collision as "already present".
    """
    payload = "\x1f".join((title, body, url or "")).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()[:32]


def _parse_date(value: object) -> datetime.date | None:
    if value is None:
        return None
    if isinstance(value, datetime.datetime):
        return value.date()
    if isinstance(value, datetime.date):
        return value
    if isinstance(value, str):
        try:
            return datetime.date.fromisoformat(value)
        except ValueError:
            pass
        try:
            return datetime.datetime.fromisoformat(value).date()
        except ValueError:
            raise ValidationError(
                "published_date is not an ISO-8601 date: %r" % (value,)
            ) from None
    raise ValidationError("published_date must be an ISO-8601 string or null")


def make_document(
    title: str,
    body: str,
    source_name: str,
    published_date: object = None,
    url: str | None = None,
) -> Document:
    """Validate fields and build a Document with its content hash."""
    if not isinstance(title, str) or not title.strip():
        raise ValidationError("document title must be a non-empty string")
    if not isinstance(body, str) or not body.strip():
        raise ValidationError("document body must be a non-empty string")
    if not isinstance(source_name, str) or not source_name.strip():
        raise ValidationError("document source_name must be a non-empty string")
    if url is not None and (not isinstance(url, str) or not url.strip()):
        raise ValidationError("document url must be a non-empty string or null")
    return Document(
        doc_id=compute_doc_id(title, body, url),
        title=title,
        body=body,
        source_name=source_name,
        published_date=_parse_date(published_date),
        url=url,
    )


def _hard_split(text: str, max_tokens: int) -> list[str]:
    """Cut an over-long sentence into pieces of at most ``max_tokens``.

    Cuts land only at token-unit starts (a CJK character or the first
    character of an alphanumeric run), never inside a unit, and the
    pieces concatenate back to ``text`` exactly.
    """
    parts: list[str] = []
    start = 0
    count = 0
    in_run = False
    for i, ch in enumerate(text):
        if ch.isspace():
            in_run = False
            continue
        if is_cjk_char(ch):
            in_run = False
        elif in_run:
            continue
        else:
            in_run = True
        # ch starts a new one-token unit at index i
        if count + 1 > max_tokens:
            parts.append(text[start:i])
            start = i
            count = 1
        else:
            count += 1
    parts.append(text[start:])
    return [p for p in parts if p]


def chunk_document(doc: Document, max_chunk_tokens: int = DEFAULT_MAX_CHUNK_TOKENS) -> list[Chunk]:
    """Split a document body into chunks of at most ``max_chunk_tokens``.

    Whole sentences are packed greedily into each chunk; a sentence that
    alone exceeds the budget is hard-split at token boundaries. Chunk
    indexes are contiguous from zero and every valid document produces at
    least one chunk.
    """
    if max_chunk_tokens < MIN_CHUNK_TOKENS:
        raise ValidationError(
            "max_chunk_tokens must be at least %d, got %d"
            % (MIN_CHUNK_TOKENS, max_chunk_tokens)
        )
    pieces: list[str] = []
    for sentence in split_sentences(doc.body):
        if estimate_tokens(sentence) > max_chunk_tokens:
            pieces.extend(_hard_split(sentence, max_chunk_tokens))
        else:
            pieces.append(sentence)

    groups: list[str] = []
    current: list[str] = []
    current_tokens = 0
    for piece in pieces:
        piece_tokens = estimate_tokens(piece)
        if current and current_tokens + piece_tokens > max_chunk_tokens:
            groups.append("".join(current))
            current = []
            current_tokens = 0
        current.append(piece)
        current_tokens += piece_tokens
    if current:
        groups.append("".join(current))

    chunks: list[Chunk] = []
    for group in groups:
        text = group.strip()
        if not text:
            continue
        chunks.append(Chunk(doc.doc_id, len(chunks), text, estimate_tokens(text)))
    return chunks


@dataclass
class IngestSummary:
    """Outcome of one ingestion batch."""

    inserted: int = 0
    skipped: int = 0
    rejected: list[tuple[int, str]] = field(default_factory=list)

    def merge(self, other: "IngestSummary") -> "IngestSummary":
        self.inserted += other.inserted
        self.skipped += other.skipped
        self.rejected.extend(other.rejected)
        return self

    def as_dict(self) -> dict:
        return {
            "inserted": self.inserted,
            "skipped": self.skipped,
            "rejected": [{"line": n, "reason": r} for n, r in self.rejected],
        }


_CORPUS_KEYS = ("title", "body", "published_date", "source_name", "url")


def parse_corpus_record(raw: object) -> Document:
    """Turn one decoded JSON value into a Document or raise ValidationError."""
    if not isinstance(raw, dict):
        raise ValidationError("corpus record must be a JSON object")
    missing = [k for k in ("title", "body", "source_name") if k not in raw]
    if missing:
        raise ValidationError("corpus record missing keys: %s" % ", ".join(missing))
    return make_document(
        title=raw.get("title"),
        body=raw.get("body"),
        source_name=raw.get("source_name"),
        published_date=raw.get("published_date"),
        url=raw.get("url"),
    )


def _parse_lines(lines: Iterable[tuple[int, str]]) -> tuple[list[Document], list[tuple[int, str]]]:
    docs: list[Document] = []
    rejected: list[tuple[int, str]] = []
    for lineno, line in lines:
        text = line.strip()
        if not text:
            continue
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            rejected.append((lineno, "invalid JSON: %s" % exc.msg))
            continue
        try:
            docs.append(parse_corpus_record(raw))
        except ValidationError as exc:
            rejected.append((lineno, exc.message))
    return docs, rejected


def read_corpus_text(text: str) -> tuple[list[Document], list[tuple[int, str]]]:
    """Parse corpus JSONL from a string. Returns (documents, rejects)."""
    return _parse_lines(enumerate(text.splitlines(), start=1))


def read_corpus_file(path: str | Path) -> tuple[list[Document], list[tuple[int, str]]]:
    """Parse a corpus JSONL file. Returns (documents, rejects)."""
    p = Path(path)
    if not p.is_file():
        raise ValidationError("corpus file not found: %s" % p)
    with open(p, encoding="utf-8") as fh:
        return _parse_lines(enumerate(fh, start=1))


class _RWLock:
    """Readers-writer lock: many concurrent readers, one exclusive writer."""

    def __init__(self) -> None:
        self._cond = threading.Condition()
        self._readers = 0
        self._writing = False

    @contextmanager
    def read(self) -> Iterator[None]:
        with self._cond:
            while self._writing:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                if self._readers == 0:
                    self._cond.notify_all()

    @contextmanager
    def write(self) -> Iterator[None]:
        with self._cond:
            while self._writing or self._readers:
                self._cond.wait()
            self._writing = True
        try:
            yield
        finally:
            with self._cond:
                self._writing = False
                self._cond.notify_all()


class CorpusStore:
    """In-memory corpus with optional on-disk persistence.

    When ``data_dir`` is given, inserted documents are appended to
    ``documents.jsonl`` (the records double as the interchange format) and
    replayed on the next open, so the store survives restarts. A partial
    trailing line, the signature of a crashed append, is dropped with a
    warning; damage anywhere else is an error.

    Subscribers registered via :meth:`subscribe` are invoked inside the
    write lock for every newly inserted document so downstream indexes
    stay consistent with the store.
    """

    def __init__(
        self,
        data_dir: str | Path | None = None,
        max_chunk_tokens: int = DEFAULT_MAX_CHUNK_TOKENS,
    ) -> None:
        if max_chunk_tokens < MIN_CHUNK_TOKENS:
            raise ValidationError(
                "max_chunk_tokens must be at least %d" % MIN_CHUNK_TOKENS
            )
        self._lock = _RWLock()
        self._docs: dict[str, Document] = {}
        self._chunks: dict[str, list[Chunk]] = {}
        self._subscribers: list[Callable[[Document, list[Chunk]], None]] = []
        self.max_chunk_tokens = max_chunk_tokens
        self._dir = Path(data_dir) if data_dir is not None else None
        if self._dir is not None:
            self._dir.mkdir(parents=True, exist_ok=True)
            self._log_path = self._dir / "documents.jsonl"
            self._meta_path = self._dir / "corpus.meta.json"
            self._load_meta()
            self._replay_log()
        else:
            self._log_path = None
            self._meta_path = None

    # -- persistence ------------------------------------------------------

    def _load_meta(self) -> None:
        if self._meta_path.is_file():
            meta = json.loads(self._meta_path.read_text(encoding="utf-8"))
            stored = int(meta.get("max_chunk_tokens", self.max_chunk_tokens))
            if stored != self.max_chunk_tokens:
                logger.warning(
                    "corpus at %s was chunked with max_chunk_tokens=%d; "
                    "using the stored value instead of %d",
                    self._dir, stored, self.max_chunk_tokens,
                )
                self.max_chunk_tokens = stored
        else:
            self._meta_path.write_text(
                json.dumps({"format": _META_FORMAT, "max_chunk_tokens": self.max_chunk_tokens}),
                encoding="utf-8",
            )

    def _replay_log(self) -> None:
        if not self._log_path.is_file():
            return
        with open(self._log_path, encoding="utf-8") as fh:
            lines = fh.readlines()
        for lineno, line in enumerate(lines, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                doc = parse_corpus_record(json.loads(text))
            except (json.JSONDecodeError, ValidationError) as exc:
                if lineno == len(lines):
                    logger.warning(
                        "dropping partial trailing record in %s (line %d): %s",
                        self._log_path, lineno, exc,
                    )
                    continue
                raise ClaimcheckError(
                    "corpus log %s is damaged at line %d: %s"
                    % (self._log_path, lineno, exc)
                ) from exc
            if doc.doc_id in self._docs:
                continue
            self._docs[doc.doc_id] = doc
            self._chunks[doc.doc_id] = chunk_document(doc, self.max_chunk_tokens)

    @staticmethod
    def _record(doc: Document) -> dict:
        return {
            "title": doc.title,
            "body": doc.body,
            "published_date": doc.published_date.isoformat() if doc.published_date else None,
            "source_name": doc.source_name,
            "url": doc.url,
        }

    def _append_log(self, doc: Document) -> None:
        if self._log_path is None:
            return
        with open(self._log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(self._record(doc), ensure_ascii=False) + "\n")

    # -- mutation ---------------------------------------------------------

    def subscribe(self, callback: Callable[[Document, list[Chunk]], None]) -> None:
        """Register a callback fired (inside the write lock) per new document."""
        self._subscribers.append(callback)

    def upsert(self, docs: Iterable[Document]) -> IngestSummary:
        """Insert new documents; duplicates by content hash are skipped.

        Each document is logged, installed, and announced to subscribers
        before the next one is considered, so a failure partway through
        leaves every already-processed document fully ingested.
        """
        summary = IngestSummary()
        with self._lock.write():
            for doc in docs:
                if doc.doc_id in self._docs:
                    summary.skipped += 1
                    continue
                chunks = chunk_document(doc, self.max_chunk_tokens)
                self._append_log(doc)
                self._docs[doc.doc_id] = doc
                self._chunks[doc.doc_id] = chunks
                for callback in self._subscribers:
                    callback(doc, chunks)
                summary.inserted += 1
        return summary

    def ingest_text(self, text: str) -> IngestSummary:
        """Parse corpus JSONL from a string and upsert what validates."""
        docs, rejected = read_corpus_text(text)
        summary = self.upsert(docs)
        summary.rejected.extend(rejected)
        return summary

    def ingest_file(self, path: str | Path) -> IngestSummary:
        """Parse a corpus JSONL file and upsert what validates."""
        docs, rejected = read_corpus_file(path)
        summary = self.upsert(docs)
        summary.rejected.extend(rejected)
        return summary

    # -- queries ----------------------------------------------------------

    def document(self, doc_id: str) -> Document | None:
        with self._lock.read():
            return self._docs.get(doc_id)

    def chunks(self, doc_id: str) -> list[Chunk]:
        with self._lock.read():
            return list(self._chunks.get(doc_id, ()))

    def chunk(self, doc_id: str, chunk_index: int) -> Chunk | None:
        with self._lock.read():
            chunks = self._chunks.get(doc_id)
            if chunks is None or not 0 <= chunk_index < len(chunks):
                return None
            return chunks[chunk_index]

    def documents(self) -> list[Document]:
        with self._lock.read():
            return list(self._docs.values())

    def all_chunks(self) -> list[Chunk]:
        with self._lock.read():
            return [c for chunks in self._chunks.values() for c in chunks]

    @property
    def doc_count(self) -> int:
        with self._lock.read():
            return len(self._docs)

    @property
    def chunk_count(self) -> int:
        with self._lock.read():
            return sum(len(v) for v in self._chunks.values())

    def __contains__(self, doc_id: str) -> bool:
        with self._lock.read():
            return doc_id in self._docs
