"""NumPy implementations of the scoring kernels.

These are the reference semantics; the compiled extension in _native.pyx
mirrors them operation for operation. Both work in float64 throughout so
the two backends agree to well under 1e-9.
"""

from __future__ import annotations

import numpy as np

NAME = "pure"


def bm25_accumulate(
    doc_rows: np.ndarray,
    term_freqs: np.ndarray,
    idf: float,
    k1: float,
    dl_norm: np.ndarray,
    scores: np.ndarray,
) -> None:
    """Add one query term's BM25 contribution into ``scores`` in place.

    ``doc_rows``   int32 row indices of documents containing the term
    ``term_freqs`` float64 term frequency per row (parallel to doc_rows)
    ``dl_norm``    float64 per-document length factor 1 - b + b*dl/avgdl
    ``scores``     float64 accumulator over all documents

    Rows within one posting list are unique, so the scatter-add never
    collides.
    """
    d = dl_norm[doc_rows]
    scores[doc_rows] += idf * (term_freqs * (k1 + 1.0)) / (term_freqs + k1 * d)


def cosine_scores(
    matrix: np.ndarray,
    norms: np.ndarray,
    query: np.ndarray,
    query_norm: float,
) -> np.ndarray:
    """Cosine similarity of ``query`` against every row of ``matrix``.

    ``matrix`` is float64 with shape (n, dim); ``norms`` holds the
    precomputed row norms. The caller guarantees ``query_norm`` and every
    row norm are positive.
    """
    return (matrix @ query) / (norms * query_norm)
