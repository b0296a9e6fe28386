"""Exact cosine-similarity index over chunk embeddings.

Vectors are quantized to float32 on insert, which makes the on-disk
snapshot round-trip bit-for-bit; all similarity arithmetic happens in
float64 over an upcast copy. Scans are exact (no ANN structure): at the
intended corpus scale a full pass through a contiguous matrix is faster
to run than an approximate index is to maintain.
"""

from __future__ import annotations

import os
import struct
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import (
    ClaimcheckError,
    DimensionMismatchError,
    ValidationError,
    ZeroVectorError,
)

_MAGIC = b"CCVIX01\n"
_HEADER = struct.Struct("<IQ")  # dimension, entry count
_REC_FIXED = struct.Struct("<HI")  # doc_id byte length, chunk_index


@dataclass(frozen=True)
class EmbeddedChunk:
    """One index entry: chunk key, stored float32 vector, and its norm."""

    doc_id: str
    chunk_index: int
    vector: np.ndarray
    norm: float


def as_unit_float64(vector: object, dimension: int | None = None) -> np.ndarray:
    """Validate a vector for similarity work and return it as float64.

    Rejects wrong shapes, non-finite values, and the zero vector (which
    has no direction to compare).
    """
    arr = np.asarray(vector, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError("vector must be one-dimensional")
    if dimension is not None and arr.shape[0] != dimension:
        raise DimensionMismatchError(
            "vector has dimension %d, expected %d" % (arr.shape[0], dimension)
        )
    if not np.all(np.isfinite(arr)):
        raise ValidationError("vector contains non-finite values")
    if float(np.linalg.norm(arr)) == 0.0:
        raise ZeroVectorError("zero vector has no direction")
    return np.ascontiguousarray(arr)


def cosine(a: object, b: object) -> float:
    """Cosine similarity of two vectors, computed in float64."""
    va = as_unit_float64(a)
    vb = as_unit_float64(b, dimension=va.shape[0])
    return float(np.dot(va, vb) / (np.linalg.norm(va) * np.linalg.norm(vb)))


class VectorIndex:
    """Chunk-level vector index keyed by (doc_id, chunk_index).

    Inserting an existing key replaces its vector. Search ties break on
    (doc_id, chunk_index) ascending so results are stable across runs and
    across save/load cycles.
    """

    def __init__(self, dimension: int) -> None:
        if int(dimension) < 1:
            raise ValidationError("dimension must be a positive integer")
        self._dim = int(dimension)
        self._keys: list[tuple[str, int]] = []
        self._pos: dict[tuple[str, int], int] = {}
        self._vecs: list[np.ndarray] = []
        self._dirty = True
        self._matrix = np.zeros((0, self._dim), dtype=np.float64)
        self._norms = np.zeros(0, dtype=np.float64)
        self._tie_rank = np.zeros(0, dtype=np.int64)

    @property
    def dimension(self) -> int:
        return self._dim

    def __len__(self) -> int:
        return len(self._keys)

    def __contains__(self, key: tuple[str, int]) -> bool:
        return key in self._pos

    def insert(self, items: Iterable[tuple[str, int, object]]) -> int:
        """Insert or replace (doc_id, chunk_index, vector) entries.

        The whole batch is validated before any of it is applied, so a
        bad vector leaves the index untouched. Returns the number of
        entries written (replacements included).
        """
        prepared: list[tuple[tuple[str, int], np.ndarray]] = []
        for doc_id, chunk_index, vector in items:
            arr = as_unit_float64(vector, dimension=self._dim)
            with np.errstate(over="ignore"):  # inf is rejected just below
                quantized = np.ascontiguousarray(arr.astype(np.float32))
            if float(np.linalg.norm(quantized.astype(np.float64))) == 0.0:
                raise ZeroVectorError(
                    "vector for (%s, %d) vanishes at float32 precision"
                    % (doc_id, chunk_index)
                )
            if not np.all(np.isfinite(quantized)):
                raise ValidationError(
                    "vector for (%s, %d) overflows float32" % (doc_id, chunk_index)
                )
            quantized.setflags(write=False)
            prepared.append(((str(doc_id), int(chunk_index)), quantized))
        for key, vec in prepared:
            row = self._pos.get(key)
            if row is None:
                self._pos[key] = len(self._keys)
                self._keys.append(key)
                self._vecs.append(vec)
            else:
                self._vecs[row] = vec
        if prepared:
            self._dirty = True
        return len(prepared)

    def get(self, doc_id: str, chunk_index: int) -> EmbeddedChunk | None:
        row = self._pos.get((doc_id, chunk_index))
        if row is None:
            return None
        vec = self._vecs[row]
        return EmbeddedChunk(
            doc_id, chunk_index, vec, float(np.linalg.norm(vec.astype(np.float64)))
        )

    def _refresh(self) -> None:
        if not self._dirty:
            return
        n = len(self._keys)
        if n:
            self._matrix = np.ascontiguousarray(
                np.stack(self._vecs).astype(np.float64)
            )
            self._norms = np.linalg.norm(self._matrix, axis=1)
        else:
            self._matrix = np.zeros((0, self._dim), dtype=np.float64)
            self._norms = np.zeros(0, dtype=np.float64)
        order = sorted(range(n), key=lambda row: self._keys[row])
        tie = np.empty(n, dtype=np.int64)
        for rank, row in enumerate(order):
            tie[row] = rank
        self._tie_rank = tie
        self._dirty = False

    def search(self, query: object, top_m: int) -> list[tuple[EmbeddedChunk, float]]:
        """The ``top_m`` most similar entries to ``query`` by cosine.

        Scores descend; exact ties order by (doc_id, chunk_index).
        """
        if top_m < 1:
            raise ValidationError("top_m must be at least 1")
        q = as_unit_float64(query, dimension=self._dim)
        if not self._keys:
            return []
        self._refresh()
        sims = kernels.cosine_scores(
            self._matrix, self._norms, q, float(np.linalg.norm(q))
        )
        order = np.lexsort((self._tie_rank, -sims))
        results: list[tuple[EmbeddedChunk, float]] = []
        for row in order[:top_m]:
            doc_id, chunk_index = self._keys[row]
            results.append(
                (
                    EmbeddedChunk(
                        doc_id, chunk_index, self._vecs[row], float(self._norms[row])
                    ),
                    float(sims[row]),
                )
            )
        return results

    # -- persistence ------------------------------------------------------

    def save(self, path: str | Path) -> None:
        """Write a snapshot; the write is atomic via a temp-file rename."""
        p = Path(path)
        tmp = p.with_name(p.name + ".tmp")
        with open(tmp, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(_HEADER.pack(self._dim, len(self._keys)))
            for (doc_id, chunk_index), vec in zip(self._keys, self._vecs):
                encoded = doc_id.encode("utf-8")
                if len(encoded) > 0xFFFF:
                    raise ValidationError("doc_id too long to snapshot: %r" % doc_id)
                fh.write(_REC_FIXED.pack(len(encoded), chunk_index))
                fh.write(encoded)
                fh.write(vec.astype("<f4").tobytes())
        os.replace(tmp, p)

    @classmethod
    def load(cls, path: str | Path) -> "VectorIndex":
        """Read a snapshot written by :meth:`save`, bit-for-bit."""
        p = Path(path)
        with open(p, "rb") as fh:
            def take(n: int, what: str) -> bytes:
                data = fh.read(n)
                if len(data) != n:
                    raise ClaimcheckError(
                        "vector snapshot %s is truncated (%s)" % (p, what)
                    )
                return data

            if take(len(_MAGIC), "magic") != _MAGIC:
                raise ClaimcheckError("not a vector snapshot: %s" % p)
            dim, count = _HEADER.unpack(take(_HEADER.size, "header"))
            index = cls(dim)
            vec_bytes = 4 * dim
            for _ in range(count):
                id_len, chunk_index = _REC_FIXED.unpack(
                    take(_REC_FIXED.size, "record header")
                )
                doc_id = take(id_len, "doc_id").decode("utf-8")
                vec = np.frombuffer(take(vec_bytes, "vector"), dtype="<f4").astype(
                    np.float32
                )
                vec = np.ascontiguousarray(vec)
                vec.setflags(write=False)
                key = (doc_id, chunk_index)
                if key in index._pos:
                    raise ClaimcheckError(
                        "vector snapshot %s repeats key %r" % (p, key)
                    )
                index._pos[key] = len(index._keys)
                index._keys.append(key)
                index._vecs.append(vec)
            if fh.read(1):
                raise ClaimcheckError("vector snapshot %s has trailing bytes" % p)
        index._dirty = True
        return index

    def stored_vectors(self) -> Sequence[tuple[tuple[str, int], np.ndarray]]:
        """(key, float32 vector) pairs in insertion order, for comparison."""
        return list(zip(self._keys, self._vecs))
