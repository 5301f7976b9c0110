"""Hot kernels for dense ring contractions.

The expensive step when expanding a matrix-product family densely is the
final merge of two open half-chains T1[a, :, :], T2[b, :, :] into the vector
of ring traces out[a, b] = tr(T1[a] @ T2[b]).  Two implementations are
provided: a numba-JIT loop and a pure-numpy BLAS path.  The BLAS path wins
at every benchmarked size (benchmarks/bench_dense.py), so it is the default;
MPVKIT_USE_NUMBA=1 opts into the JIT loop and MPVKIT_NO_NUMBA=1 forces the
numpy path regardless.
"""

from __future__ import annotations

import numpy as np

from .config import use_numba

_NUMBA_MERGE = None


def _build_numba_merge():
    global _NUMBA_MERGE
    if _NUMBA_MERGE is not None:
        return _NUMBA_MERGE
    import numba

    @numba.njit(cache=True, parallel=True)
    def merge(t1, t2):  # pragma: no cover - exercised via merge_ring_traces
        m1, D, _ = t1.shape
        m2 = t2.shape[0]
        out = np.empty((m1, m2), dtype=np.complex128)
        for a in numba.prange(m1):
            for b in range(m2):
                acc = 0.0 + 0.0j
                for i in range(D):
                    for j in range(D):
                        acc += t1[a, i, j] * t2[b, j, i]
                out[a, b] = acc
        return out

    _NUMBA_MERGE = merge
    return merge


def merge_ring_traces_numpy(t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
    """out[a, b] = tr(t1[a] @ t2[b]) via one BLAS matmul."""
    m1, D, _ = t1.shape
    m2 = t2.shape[0]
    # tr(X @ Y) = sum_{ij} X[i, j] * Y[j, i]
    lhs = t1.reshape(m1, D * D)
    rhs = t2.transpose(0, 2, 1).reshape(m2, D * D)
    return lhs @ rhs.T


def merge_ring_traces(t1: np.ndarray, t2: np.ndarray) -> np.ndarray:
    if use_numba():
        merge = _build_numba_merge()
        return merge(np.ascontiguousarray(t1), np.ascontiguousarray(t2))
    return merge_ring_traces_numpy(t1, t2)
