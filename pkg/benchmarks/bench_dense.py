"""Benchmark the ring-trace merge kernel: numba JIT loop vs numpy BLAS.

Run:  python3 benchmarks/bench_dense.py
The env flag MPVKIT_NO_NUMBA=1 switches the library to the numpy path; this
script times both implementations directly.
"""

from __future__ import annotations

import time

import numpy as np

from mpvkit.kernels import merge_ring_traces_numpy


def _time(fn, *args, repeat: int = 5) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    rng = np.random.default_rng(0)
    try:
        from mpvkit.kernels import _build_numba_merge

        numba_merge = _build_numba_merge()
    except ImportError:
        numba_merge = None
        print("numba not available; timing numpy only")

    print(f"{'m1 x m2 x D':>18} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>9}")
    for m, D in [(256, 4), (1024, 8), (4096, 8), (4096, 16), (16384, 4)]:
        t1 = rng.standard_normal((m, D, D)) + 1j * rng.standard_normal((m, D, D))
        t2 = rng.standard_normal((m, D, D)) + 1j * rng.standard_normal((m, D, D))
        t_np = _time(merge_ring_traces_numpy, t1, t2)
        label = f"{m} x {m} x {D}"
        if numba_merge is None:
            print(f"{label:>18} {t_np * 1e3:12.2f} {'-':>12} {'-':>9}")
            continue
        numba_merge(t1, t2)  # JIT warm-up outside the timed region
        t_nb = _time(numba_merge, t1, t2)
        print(f"{label:>18} {t_np * 1e3:12.2f} {t_nb * 1e3:12.2f} {t_np / t_nb:9.2f}")


if __name__ == "__main__":
    main()
