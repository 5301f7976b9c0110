"""Global numerical conventions: tolerances, dense-expansion caps, kernel choice.

All comparisons in the library are relative: a quantity q is "zero" when
|q| < tol * scale, where scale is the magnitude of the objects entering the
comparison (max |entry|, spectral radius, ...).  Every public routine accepts
an optional ``tol`` override; ``DEFAULT_TOL`` is used otherwise.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

DEFAULT_TOL = 1e-10

# Dense expansion caps: a pure state on N sites with physical dimension d is
# expanded only when d**N <= MAX_PURE_AMPLITUDES; a density operator only when
# d**(2N) <= MAX_MIXED_AMPLITUDES.  Callers may pass a larger cap explicitly.
MAX_PURE_AMPLITUDES = 2**20
MAX_MIXED_AMPLITUDES = 2**24

# Eigenvalues of density operators below this absolute threshold are treated
# as exact zeros when computing entropies.
ENTROPY_EIGENVALUE_FLOOR = 1e-14

# Peripheral spectrum: eigenvalues with |lambda| > 1 - PERIPHERAL_FACTOR * tol
# of a spectrally normalized transfer matrix count as peripheral.
PERIPHERAL_FACTOR = 10.0


def use_numba() -> bool:
    """Whether the JIT kernels are active (pure-numpy path otherwise).

    The BLAS-backed numpy merge is faster at every benchmarked size (see
    benchmarks/bench_dense.py), so the JIT path is opt-in via
    MPVKIT_USE_NUMBA=1; MPVKIT_NO_NUMBA=1 always forces the numpy path.
    """
    if os.environ.get("MPVKIT_NO_NUMBA", "").strip() not in ("", "0"):
        return False
    if os.environ.get("MPVKIT_USE_NUMBA", "").strip() in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


@dataclass(frozen=True)
class Tolerances:
    """Bundle of the knobs a single analysis run may want to override."""

    tol: float = DEFAULT_TOL
    max_pure_amplitudes: int = MAX_PURE_AMPLITUDES
    max_mixed_amplitudes: int = MAX_MIXED_AMPLITUDES

    def zero(self, value: float, scale: float = 1.0) -> bool:
        return abs(value) < self.tol * max(scale, 1e-300)
