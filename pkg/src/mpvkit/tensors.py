"""Site tensors for translation-invariant matrix-product families on rings.

An MpvTensor A holds d matrices A^i of size D x D (index order: physical,
left virtual, right virtual).  On a ring of N sites it generates the vector

    V_N(A) = sum_{i1..iN} tr(A^{i1} ... A^{iN}) |i1 ... iN>.

An MpdoTensor M holds d*d matrices M^{ij} (ket index i, bra index j) and
generates the operator rho_N(M) = sum tr(M^{i1 j1} ... M^{iN jN}) |i..><j..|.

Dense expansion is only allowed below configurable amplitude caps; the
family-level routines elsewhere in the package work on transfer matrices and
never expand densely except inside those caps.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .config import MAX_MIXED_AMPLITUDES, MAX_PURE_AMPLITUDES
from .kernels import merge_ring_traces


def _as_complex(a) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(a, dtype=np.complex128))


@dataclass(frozen=True)
class MpvTensor:
    """d matrices of size D x D; entries[i, a, b] = (A^i)_{ab}."""

    entries: np.ndarray

    def __post_init__(self):
        arr = _as_complex(self.entries)
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise ValueError(f"expected shape (d, D, D), got {arr.shape}")
        object.__setattr__(self, "entries", arr)

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    @property
    def D(self) -> int:
        return self.entries.shape[1]

    def matrix(self, i: int) -> np.ndarray:
        return self.entries[i]

    def scaled(self, c: complex) -> "MpvTensor":
        return MpvTensor(self.entries * c)

    def direct_sum(self, other: "MpvTensor") -> "MpvTensor":
        if self.d != other.d:
            raise ValueError("direct sum requires equal physical dimensions")
        D1, D2 = self.D, other.D
        out = np.zeros((self.d, D1 + D2, D1 + D2), dtype=np.complex128)
        out[:, :D1, :D1] = self.entries
        out[:, D1:, D1:] = other.entries
        return MpvTensor(out)

    def conjugated(self, x: np.ndarray, x_inv: np.ndarray | None = None) -> "MpvTensor":
        """Gauge transform A^i -> x A^i x^{-1}."""
        if x_inv is None:
            x_inv = np.linalg.inv(x)
        return MpvTensor(np.einsum("ab,ibc,cd->iad", x, self.entries, x_inv))


@dataclass(frozen=True)
class MpdoTensor:
    """d*d matrices of size D x D; entries[i, j, a, b] with i=ket, j=bra."""

    entries: np.ndarray

    def __post_init__(self):
        arr = _as_complex(self.entries)
        if arr.ndim != 4 or arr.shape[0] != arr.shape[1] or arr.shape[2] != arr.shape[3]:
            raise ValueError(f"expected shape (d, d, D, D), got {arr.shape}")
        object.__setattr__(self, "entries", arr)

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    @property
    def D(self) -> int:
        return self.entries.shape[2]

    def mpv_view(self) -> MpvTensor:
        """Reinterpret the (ket, bra) pair as one physical index of size d*d."""
        d, D = self.d, self.D
        return MpvTensor(self.entries.reshape(d * d, D, D))

    @staticmethod
    def from_mpv_view(a: MpvTensor) -> "MpdoTensor":
        d2 = a.d
        d = int(round(np.sqrt(d2)))
        if d * d != d2:
            raise ValueError("physical dimension is not a perfect square")
        return MpdoTensor(a.entries.reshape(d, d, a.D, a.D))

    def physical_trace_matrix(self) -> np.ndarray:
        """sum_i M^{ii}: the bond map obtained by tracing the physical pair."""
        return np.einsum("iiab->ab", self.entries)

    def scaled(self, c: complex) -> "MpdoTensor":
        return MpdoTensor(self.entries * c)

    def adjoint_site(self) -> "MpdoTensor":
        """Swap ket/bra and conjugate; generates rho_N(M)^dagger."""
        return MpdoTensor(np.conj(self.entries.transpose(1, 0, 2, 3)))

    def vertical_view(self) -> MpvTensor:
        """Exchange physical and virtual roles.

        The result has physical index (alpha, beta) of size D*D and D_vert = d
        matrices V^{(ab)}_{ij} = M[i, j, a, b]; products of those matrices
        implement vertical stacking (bra of the lower site contracted with ket
        of the upper one).
        """
        return MpvTensor(self.entries.transpose(2, 3, 0, 1).reshape(self.D * self.D, self.d, self.d))

    @staticmethod
    def from_vertical_view(a: MpvTensor) -> "MpdoTensor":
        D2 = a.d
        D = int(round(np.sqrt(D2)))
        if D * D != D2:
            raise ValueError("vertical physical dimension is not a perfect square")
        return MpdoTensor(a.entries.reshape(D, D, a.D, a.D).transpose(2, 3, 0, 1))

    def vertical_product(self, other: "MpdoTensor") -> "MpdoTensor":
        """Operator product of the two generated families, site by site.

        N[(i, j), (k, l), a1 a2, b1 b2] = sum_m M[i, m, a1, b1] O[m, l, a2, b2]
        with combined bond (self, other).
        """
        n = np.einsum("imab,mjcd->ijacbd", self.entries, other.entries)
        d = self.d
        D = self.D * other.D
        return MpdoTensor(n.reshape(d, d, D, D))


class TransferMap:
    """E = sum_i A^i (x) conj(B^i), stored as a (Da*Db) x (Da*Db) matrix.

    matrix[(a, a'), (b, b')] = sum_i A^i[a, b] * conj(B^i[a', b']); acting on
    row-major vectorized X it implements X -> sum_i A^i X B^{i dagger}.
    """

    def __init__(self, a: MpvTensor, b: MpvTensor | None = None):
        b = a if b is None else b
        self.Da, self.Db = a.D, b.D
        mat = np.einsum("iab,icd->acbd", a.entries, np.conj(b.entries))
        self.matrix = mat.reshape(self.Da * self.Db, self.Da * self.Db)
        self._eig = None

    def apply_right(self, x: np.ndarray) -> np.ndarray:
        return (self.matrix @ x.reshape(-1)).reshape(self.Da, self.Db)

    def apply_left(self, x: np.ndarray) -> np.ndarray:
        return (self.matrix.conj().T @ x.reshape(-1)).reshape(self.Da, self.Db)

    def eig(self):
        if self._eig is None:
            self._eig = np.linalg.eig(self.matrix)
        return self._eig

    def spectral_radius(self) -> float:
        vals, _ = self.eig()
        return float(np.max(np.abs(vals))) if vals.size else 0.0

    def peripheral_eigenvalues(self, tol: float, radius: float | None = None) -> np.ndarray:
        """Eigenvalues with modulus within 10*tol of the spectral radius."""
        vals, _ = self.eig()
        r = self.spectral_radius() if radius is None else radius
        if r == 0.0:
            return np.array([])
        return vals[np.abs(vals) > r * (1.0 - 10.0 * tol)]


def transfer_map(a: MpvTensor, b: MpvTensor | None = None) -> TransferMap:
    return TransferMap(a, b)


def block(a, p: int):
    """Blocking: group p consecutive sites into one.

    For an MpvTensor the result has physical dimension d**p with
    C^{(i1..ip)} = A^{i1} ... A^{ip} (i1 most significant, matching the
    dense-expansion site order).  For an MpdoTensor the ket and bra indices
    are grouped the same way.
    """
    if p < 1:
        raise ValueError("blocking factor must be >= 1")
    if isinstance(a, MpdoTensor):
        v = block(a.mpv_view(), p)
        d = a.d**p
        D = a.D
        # combined index of the view is (i1 j1 i2 j2 ...); regroup to kets/bras
        arr = v.entries.reshape([a.d, a.d] * p + [D, D])
        perm = list(range(0, 2 * p, 2)) + list(range(1, 2 * p, 2)) + [2 * p, 2 * p + 1]
        return MpdoTensor(arr.transpose(perm).reshape(d, d, D, D))
    if p == 1:
        return a
    out = a.entries
    for _ in range(p - 1):
        out = np.einsum("aij,bjk->abik", out, a.entries).reshape(-1, a.D, a.D)
    return MpvTensor(out)


def open_chain(a: MpvTensor, length: int) -> np.ndarray:
    """All length-site matrix products: shape (d**length, D, D)."""
    if length < 1:
        raise ValueError("length must be >= 1")
    if length == 1:
        return a.entries
    left = open_chain(a, length // 2)
    right = open_chain(a, length - length // 2)
    return np.einsum("aij,bjk->abik", left, right).reshape(-1, a.D, a.D)


def _check_cap(amplitudes: int, cap: int | None, default_cap: int):
    cap = default_cap if cap is None else cap
    if amplitudes > cap:
        raise ValueError(
            f"dense expansion of {amplitudes} amplitudes exceeds the cap {cap}; "
            "pass an explicit cap to override"
        )


def mpv_dense(a: MpvTensor, n: int, cap: int | None = None) -> np.ndarray:
    """Dense ring vector V_N(A) of length d**n (site 1 most significant)."""
    _check_cap(a.d**n, cap, MAX_PURE_AMPLITUDES)
    if n == 1:
        return np.einsum("iaa->i", a.entries)
    t1 = open_chain(a, n // 2)
    t2 = open_chain(a, n - n // 2)
    return merge_ring_traces(t1, t2).reshape(-1)


def mpdo_dense(m: MpdoTensor, n: int, cap: int | None = None) -> np.ndarray:
    """Dense ring operator rho_N(M) as a (d**n, d**n) matrix."""
    _check_cap(m.d ** (2 * n), cap, MAX_MIXED_AMPLITUDES)
    v = mpv_dense(m.mpv_view(), n, cap=m.d ** (2 * n))
    d = m.d
    arr = v.reshape([d, d] * n)
    perm = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    return arr.transpose(perm).reshape(d**n, d**n)


def mpdo_dense_mixed(sites: Sequence[MpdoTensor], cap: int | None = None) -> np.ndarray:
    """Ring operator with a possibly different tensor on every site."""
    if not sites:
        raise ValueError("need at least one site")
    dims = [m.d for m in sites]
    total = int(np.prod([d * d for d in dims]))
    _check_cap(total, cap, MAX_MIXED_AMPLITUDES)
    t = sites[0].mpv_view().entries
    for m in sites[1:]:
        t = np.einsum("aij,bjk->abik", t, m.mpv_view().entries).reshape(-1, t.shape[1], m.D)
    v = np.einsum("aii->a", t)
    arr = v.reshape([x for d in dims for x in (d, d)])
    n = len(sites)
    perm = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    dn = int(np.prod(dims))
    return arr.transpose(perm).reshape(dn, dn)


def open_chain_vectors(a: MpvTensor, length: int) -> np.ndarray:
    """Matrix S[(alpha, beta), (i1..iL)] of open-chain coefficients.

    Row (alpha, beta) holds the vector sum_{i's} (A^{i1}..A^{iL})_{alpha beta};
    its row space is the ground-space candidate used by parent-Hamiltonian
    constructions.
    """
    t = open_chain(a, length)  # (d^L, D, D)
    return t.transpose(1, 2, 0).reshape(a.D * a.D, -1)


# ---------------------------------------------------------------------------
# dense-state helpers


def reduced_density(psi: np.ndarray, d: int, n: int, keep: int) -> np.ndarray:
    """Reduced density matrix of the first ``keep`` sites of a pure state."""
    m = psi.reshape(d**keep, d ** (n - keep))
    return m @ m.conj().T


def partial_trace_keep_first(rho: np.ndarray, d: int, n: int, keep: int) -> np.ndarray:
    """Trace out the last n - keep sites of an operator on n sites."""
    dk, dr = d**keep, d ** (n - keep)
    return np.einsum("abcb->ac", rho.reshape(dk, dr, dk, dr))


def partial_trace_keep_last(rho: np.ndarray, d: int, n: int, keep: int) -> np.ndarray:
    dk, dr = d ** (n - keep), d**keep
    return np.einsum("abac->bc", rho.reshape(dk, dr, dk, dr))


def von_neumann_entropy(rho: np.ndarray, eig_floor: float = 1e-14) -> float:
    """Base-2 von Neumann entropy; eigenvalues below eig_floor count as zero.

    Accepts either a density matrix or a 1-d array of probabilities.
    """
    rho = np.asarray(rho)
    if rho.ndim == 1:
        vals = rho.real
    else:
        vals = np.linalg.eigvalsh((rho + rho.conj().T) / 2.0)
    vals = vals[vals > eig_floor]
    if vals.size == 0:
        return 0.0
    return float(-np.sum(vals * np.log2(vals)))


def direct_sum_tensors(tensors: Sequence[MpvTensor]) -> MpvTensor:
    return reduce(lambda x, y: x.direct_sum(y), tensors)


def mpdo_from_pure(a: MpvTensor) -> MpdoTensor:
    """Embed a pure-state tensor: M[i,j] = A^i (x) conj(A^j), so the
    generated operators are the unnormalized pure states |V_N><V_N|."""
    m = np.einsum("iab,jcd->ijacbd", a.entries, a.entries.conj())
    return MpdoTensor(m.reshape(a.d, a.d, a.D * a.D, a.D * a.D))
