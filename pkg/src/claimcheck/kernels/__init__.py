"""Scoring kernel selection.

The compiled BM25 kernel is used when it built successfully; otherwise
the NumPy fallback takes over with identical semantics. Set the
environment variable CLAIMCHECK_PURE_KERNELS=1 before import to force
the fallback (useful for benchmarking and for debugging suspected
extension issues). The cosine scan is the NumPy implementation in every
configuration because its BLAS matvec outruns the compiled loop.

Callers must pass C-contiguous arrays with the documented dtypes
(int32 row indices, float64 everything else); both backends assume it.
"""

from __future__ import annotations

import os

from . import pure

_impl = pure
if not os.environ.get("CLAIMCHECK_PURE_KERNELS"):
    try:
        from . import _native as _native_impl
    except ImportError:
        pass
    else:
        _impl = _native_impl

BACKEND = _impl.NAME
bm25_accumulate = _impl.bm25_accumulate
# The dense cosine scan is a BLAS matvec in the numpy implementation and
# a scalar loop in the compiled one; BLAS wins by about 2x at retrieval
# sizes (see benchmarks/bench_kernels.py), so the scan always takes the
# numpy path. The compiled variant stays importable for comparison.
cosine_scores = pure.cosine_scores


def available_backends() -> dict[str, object]:
    """Every importable backend module keyed by name.

    The benchmark uses this to compare implementations in one process
    regardless of which one is active.
    """
    backends: dict[str, object] = {"pure": pure}
    try:
        from . import _native
    except ImportError:
        pass
    else:
        backends["native"] = _native
    return backends
