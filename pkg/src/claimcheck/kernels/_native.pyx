# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scoring kernels: BM25 posting accumulation and cosine scans.

Semantics match kernels.pure exactly; see that module for the contract.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

NAME = "native"


def bm25_accumulate(
    cnp.int32_t[::1] doc_rows,
    cnp.float64_t[::1] term_freqs,
    double idf,
    double k1,
    cnp.float64_t[::1] dl_norm,
    cnp.float64_t[::1] scores,
):
    cdef Py_ssize_t i
    cdef Py_ssize_t n = doc_rows.shape[0]
    cdef double tf
    cdef Py_ssize_t row
    for i in range(n):
        row = doc_rows[i]
        tf = term_freqs[i]
        scores[row] += idf * (tf * (k1 + 1.0)) / (tf + k1 * dl_norm[row])


def cosine_scores(
    cnp.float64_t[:, ::1] matrix,
    cnp.float64_t[::1] norms,
    cnp.float64_t[::1] query,
    double query_norm,
):
    cdef Py_ssize_t n = matrix.shape[0]
    cdef Py_ssize_t dim = matrix.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc
    out = np.empty(n, dtype=np.float64)
    cdef cnp.float64_t[::1] out_view = out
    for i in range(n):
        acc = 0.0
        for j in range(dim):
            acc += matrix[i, j] * query[j]
        out_view[i] = acc / (norms[i] * query_norm)
    return out
