"""Compare the compiled scoring kernels against the NumPy fallback.

Times both backends on the two hot operations (BM25 accumulation over
posting lists, cosine scans over the chunk matrix) at retrieval-shaped
sizes, then runs a combined recall-plus-rerank pass through the real
index classes and reports it against the 200 ms interactive budget.

Run from a checkout:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --docs 50000 --dim 1024
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from claimcheck.keyword import KeywordIndex
from claimcheck.kernels import available_backends
from claimcheck.vectors import VectorIndex


def median_ms(fn, repeats: int) -> float:
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        samples.append((time.perf_counter() - start) * 1000.0)
    return statistics.median(samples)


def bench_bm25(backends: dict, n_docs: int, repeats: int) -> dict[str, float]:
    rng = np.random.default_rng(7)
    # One query term hitting a fifth of the corpus, accumulated 4 times
    # (a typical extracted-keyword count) per measured call.
    n_hits = max(1, n_docs // 5)
    rows = rng.choice(n_docs, size=n_hits, replace=False).astype(np.int32)
    tfs = rng.integers(1, 9, size=n_hits).astype(np.float64)
    dl_norm = 0.25 + rng.random(n_docs)
    results = {}
    for name, module in backends.items():
        scores = np.zeros(n_docs)

        def one_pass(module=module, scores=scores):
            for _ in range(4):
                module.bm25_accumulate(rows, tfs, 1.7, 1.2, dl_norm, scores)

        results[name] = median_ms(one_pass, repeats)
    return results


def bench_cosine(
    backends: dict, n_chunks: int, dim: int, repeats: int
) -> dict[str, float]:
    rng = np.random.default_rng(11)
    matrix = np.ascontiguousarray(rng.standard_normal((n_chunks, dim)))
    norms = np.linalg.norm(matrix, axis=1)
    query = np.ascontiguousarray(rng.standard_normal(dim))
    query_norm = float(np.linalg.norm(query))
    results = {}
    for name, module in backends.items():
        results[name] = median_ms(
            lambda module=module: module.cosine_scores(
                matrix, norms, query, query_norm
            ),
            repeats,
        )
    return results


def bench_pipeline(n_docs: int, dim: int, repeats: int) -> float:
    """Recall plus rerank through the real index classes, active backend."""
    rng = np.random.default_rng(13)
    vocabulary = ["term%03d" % i for i in range(400)]
    keywords = KeywordIndex()
    vectors = VectorIndex(dim)
    batch = []
    for d in range(n_docs):
        doc_id = "doc%05d" % d
        words = rng.choice(vocabulary, size=30)
        keywords.add_document(doc_id, " ".join(words))
        batch.append((doc_id, 0, rng.standard_normal(dim)))
        if len(batch) == 1000:
            vectors.insert(batch)
            batch = []
    if batch:
        vectors.insert(batch)

    query_terms = list(rng.choice(vocabulary, size=4))
    query_vec = rng.standard_normal(dim)
    hypothesis_vec = rng.standard_normal(dim)

    def one_query():
        keywords.search(query_terms, 5)
        pool = vectors.search(query_vec, 25)
        # Rerank survivors against the hypothesis embedding.
        for entry, _ in pool:
            v = entry.vector.astype(np.float64)
            float(np.dot(v, hypothesis_vec) / (np.linalg.norm(v) * np.linalg.norm(hypothesis_vec)))

    return median_ms(one_query, repeats)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--docs", type=int, default=10_000, help="corpus size")
    parser.add_argument("--dim", type=int, default=768, help="embedding width")
    parser.add_argument("--repeats", type=int, default=25, help="timed repeats")
    args = parser.parse_args()

    backends = available_backends()
    print("backends built: %s" % ", ".join(sorted(backends)))
    print()

    bm25 = bench_bm25(backends, args.docs, args.repeats)
    cosine = bench_cosine(backends, args.docs, args.dim, args.repeats)
    width = max(len(n) for n in backends)
    print("%-*s  %14s  %18s" % (width, "backend", "bm25 4-term ms", "cosine %dx%d ms" % (args.docs, args.dim)))
    for name in sorted(backends):
        print("%-*s  %14.3f  %18.3f" % (width, name, bm25[name], cosine[name]))
    if "native" in bm25 and "pure" in bm25:
        print()
        print(
            "native speedup: bm25 %.2fx, cosine %.2fx"
            % (bm25["pure"] / bm25["native"], cosine["pure"] / cosine["native"])
        )

    print()
    total = bench_pipeline(args.docs, args.dim, args.repeats)
    verdict = "within" if total <= 200.0 else "OVER"
    print(
        "recall + rerank over %d chunks (dim %d): %.1f ms median, %s the 200 ms budget"
        % (args.docs, args.dim, total, verdict)
    )


if __name__ == "__main__":
    main()
