"""Keyword extraction and the BM25 inverted index.

The index scores whole documents (title plus body) with Okapi BM25 and
returns only documents containing at least one query term. Scoring runs
through the shared kernels so large corpora stay fast; ordering is fully
deterministic with doc_id as the tie-break.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ValidationError
from .text import default_stopwords, tokenize

DEFAULT_MAX_TERMS = 8


@dataclass(frozen=True)
class Bm25Params:
    """Okapi BM25 shape parameters."""

    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self) -> None:
        if not (self.k1 >= 0.0 and math.isfinite(self.k1)):
            raise ValidationError("k1 must be a finite number >= 0")
        if not (0.0 <= self.b <= 1.0):
            raise ValidationError("b must lie in [0, 1]")


def extract_keywords(
    query: str,
    max_terms: int = DEFAULT_MAX_TERMS,
    stopwords: frozenset[str] | None = None,
) -> list[str]:
    """Select the strongest query terms for keyword recall.

    Terms are tokenized like indexed text, stopwords are dropped, and the
    survivors are ranked by in-query frequency with first occurrence
    breaking ties. An empty or all-stopword query yields an empty list.
    """
    if max_terms < 1:
        raise ValidationError("max_terms must be at least 1")
    if stopwords is None:
        stopwords = default_stopwords()
    counts: dict[str, int] = {}
    first_seen: dict[str, int] = {}
    for position, term in enumerate(tokenize(query)):
        if term in stopwords:
            continue
        counts[term] = counts.get(term, 0) + 1
        first_seen.setdefault(term, position)
    ranked = sorted(counts, key=lambda t: (-counts[t], first_seen[t]))
    return ranked[:max_terms]


class KeywordIndex:
    """Incremental BM25 index over whole documents.

    idf(term) = ln(1 + (N - df + 0.5) / (df + 0.5)), which is strictly
    positive, so "score > 0" and "contains a query term" coincide and the
    index never surfaces a document with no overlap.

    Mutation must be serialized by the caller (the corpus store's write
    lock does this); queries may then run concurrently.
    """

    def __init__(self, params: Bm25Params | None = None) -> None:
        self._params = params or Bm25Params()
        self._postings: dict[str, list[tuple[int, int]]] = {}
        self._doc_ids: list[str] = []
        self._row_of: dict[str, int] = {}
        self._doc_lens: list[int] = []
        self._dirty = True
        self._compiled: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        self._doc_len_arr = np.zeros(0, dtype=np.float64)
        self._avgdl = 0.0
        self._tie_rank = np.zeros(0, dtype=np.int64)

    @property
    def params(self) -> Bm25Params:
        return self._params

    def __len__(self) -> int:
        return len(self._doc_ids)

    def add_document(self, doc_id: str, text: str) -> None:
        """Index one document's text under ``doc_id``.

        ``doc_id`` must be new; the corpus store guarantees that by
        deduplicating on content hash before announcing documents.
        """
        if doc_id in self._row_of:
            raise ValidationError("document already indexed: %s" % doc_id)
        tokens = tokenize(text)
        row = len(self._doc_ids)
        self._doc_ids.append(doc_id)
        self._row_of[doc_id] = row
        self._doc_lens.append(len(tokens))
        for term, tf in Counter(tokens).items():
            self._postings.setdefault(term, []).append((row, tf))
        self._dirty = True

    def posting(self, term: str) -> list[tuple[str, int]]:
        """(doc_id, term frequency) entries for one term, sorted by doc_id."""
        entries = self._postings.get(term, ())
        return sorted((self._doc_ids[row], tf) for row, tf in entries)

    def document_frequency(self, term: str) -> int:
        return len(self._postings.get(term, ()))

    def _refresh(self) -> None:
        if not self._dirty:
            return
        n = len(self._doc_ids)
        self._doc_len_arr = np.asarray(self._doc_lens, dtype=np.float64)
        self._avgdl = float(self._doc_len_arr.mean()) if n else 0.0
        order = sorted(range(n), key=lambda row: self._doc_ids[row])
        tie = np.empty(n, dtype=np.int64)
        for rank, row in enumerate(order):
            tie[row] = rank
        self._tie_rank = tie
        self._compiled.clear()
        self._dirty = False

    def _compiled_posting(self, term: str) -> tuple[np.ndarray, np.ndarray]:
        cached = self._compiled.get(term)
        if cached is None:
            entries = self._postings[term]
            rows = np.asarray([row for row, _ in entries], dtype=np.int32)
            tfs = np.asarray([tf for _, tf in entries], dtype=np.float64)
            cached = (rows, tfs)
            self._compiled[term] = cached
        return cached

    def search(self, terms: list[str], top_n: int) -> list[tuple[str, float]]:
        """Best ``top_n`` documents for the given terms.

        Repeated query terms count once. Results come back as
        (doc_id, score) sorted by score descending, then doc_id ascending,
        and contain only documents matching at least one term.
        """
        if top_n < 1:
            raise ValidationError("top_n must be at least 1")
        deduped = list(dict.fromkeys(terms))
        self._refresh()
        n = len(self._doc_ids)
        if n == 0 or not deduped:
            return []
        avgdl = self._avgdl if self._avgdl > 0 else 1.0
        dl_norm = (1.0 - self._params.b) + self._params.b * self._doc_len_arr / avgdl
        scores = np.zeros(n, dtype=np.float64)
        matched: list[np.ndarray] = []
        for term in deduped:
            if term not in self._postings:
                continue
            rows, tfs = self._compiled_posting(term)
            df = rows.shape[0]
            idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
            kernels.bm25_accumulate(rows, tfs, idf, self._params.k1, dl_norm, scores)
            matched.append(rows)
        if not matched:
            return []
        touched = np.unique(np.concatenate(matched))
        order = np.lexsort((self._tie_rank[touched], -scores[touched]))
        top = touched[order[:top_n]]
        return [(self._doc_ids[row], float(scores[row])) for row in top]
