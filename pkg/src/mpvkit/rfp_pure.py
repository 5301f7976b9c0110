"""Renormalization fixed points of translation-invariant pure states.

The renormalization step on a matrix-product tensor squares its transfer
map.  A family is a fixed point of that flow exactly when the transfer map
of its trace-preserving canonical representative is idempotent; the same
class of tensors is characterized by distance-independent correlations plus
local orthogonality of the normal blocks, and by possessing a commuting
nearest-neighbour parent Hamiltonian.  This module implements all three
characterizations plus the explicit entangled-pair decomposition of a fixed
point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOL, MAX_PURE_AMPLITUDES
from .canonical import CanonicalDecomposition, canonical_form, to_cfii
from .tensors import (
    MpvTensor,
    TransferMap,
    mpv_dense,
    open_chain_vectors,
    von_neumann_entropy,
)

__all__ = [
    "FlowResult",
    "RfpDecomposition",
    "ParentHamiltonian",
    "DecorrelationResult",
    "renormalization_flow",
    "is_rfp_pure",
    "rfp_decompose",
    "is_cid",
    "is_locally_orthogonal",
    "parent_hamiltonian",
    "entropy_profile_pure",
    "decorrelation_check",
]


def _cfii_transfer(a: MpvTensor | CanonicalDecomposition, tol: float):
    """Transfer matrix of the trace-preserving representative, weights
    normalized so the largest modulus is 1."""
    rep, lams, dec = to_cfii(a, tol)
    s = dec.scale
    mats = rep.entries / s if s > 0 else rep.entries
    return TransferMap(MpvTensor(mats)).matrix, dec, lams


# ---------------------------------------------------------------------------
# flow and fixed-point test


@dataclass
class FlowResult:
    converged: bool
    steps: int
    limit: np.ndarray
    residuals: list[float]
    initial: np.ndarray

    @property
    def initial_is_fixed(self) -> bool:
        return bool(self.residuals and self.residuals[0] < 1e-9)


def renormalization_flow(
    a: MpvTensor, max_steps: int = 60, tol: float = DEFAULT_TOL
) -> FlowResult:
    """Iterate the transfer map of the canonical representative through
    blocking steps E <- E^2 until idempotent."""
    e, dec, _ = _cfii_transfer(a, tol)
    radius = float(np.max(np.abs(np.linalg.eigvals(e))))
    if abs(radius - 1.0) > 1e-6:
        raise ValueError(
            f"unnormalized input: canonical transfer spectral radius {radius:.6g} != 1"
        )
    initial = e.copy()
    residuals = []
    for step in range(max_steps + 1):
        r = float(np.linalg.norm(e @ e - e))
        residuals.append(r)
        if r < max(1e-11, tol):
            return FlowResult(True, step, e, residuals, initial)
        e = e @ e
    return FlowResult(False, max_steps, e, residuals, initial)


def is_rfp_pure(a: MpvTensor | CanonicalDecomposition, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """Fixed-point test: is the canonical transfer map idempotent?

    Returns (verdict, witness) with witness = ||E^2 - E||.
    """
    e, _, _ = _cfii_transfer(a, tol)
    witness = float(np.linalg.norm(e @ e - e))
    return witness < max(1e-8, 100.0 * tol), witness


# ---------------------------------------------------------------------------
# fixed-point decomposition


@dataclass
class RfpDecomposition:
    lambdas: list[np.ndarray]  # diagonal of Lambda_j, positive, summing to 1
    isometries: list[np.ndarray]  # U_j, shape (d, D_j, D_j)
    decomposition: CanonicalDecomposition
    isometry_residual: float

    def pair_state(self, j: int) -> np.ndarray:
        """|phi_j> = sum_m sqrt(lam_m) |m,m> on the virtual pair."""
        lam = self.lambdas[j]
        d_j = lam.shape[0]
        phi = np.zeros(d_j * d_j, dtype=np.complex128)
        phi[:: d_j + 1] = np.sqrt(lam)
        return phi

    def block_tensor(self, j: int) -> MpvTensor:
        lam_sqrt = np.sqrt(self.lambdas[j])
        return MpvTensor(lam_sqrt[None, :, None] * self.isometries[j])

    def reassemble(self) -> MpvTensor:
        return self.decomposition.reassemble()


def rfp_decompose(a: MpvTensor, tol: float = DEFAULT_TOL) -> RfpDecomposition:
    """Entangled-pair form of a fixed-point tensor.

    Each trace-preserving normal block C satisfies sum_i C^i X C^{i dag} =
    tr(X) Lambda, so U^i = Lambda^{-1/2} C^i assembles an isometry from the
    virtual pair to the physical leg and C^i = Lambda^{1/2} U^i.
    """
    dec = canonical_form(a, tol) if isinstance(a, MpvTensor) else a
    ok, witness = is_rfp_pure(dec, tol)
    if not ok:
        raise ValueError(f"not a fixed point (idempotency witness {witness:.3g})")
    lambdas, isometries = [], []
    worst = 0.0
    for rep, lam in zip(dec.bnt, dec.fixed_points):
        d_j = rep.D
        u = lam[None, :, None] ** -0.5 * rep.entries
        gram = np.einsum("iab,icd->abcd", u, u.conj())
        ident = np.einsum("ac,bd->abcd", np.eye(d_j), np.eye(d_j))
        worst = max(worst, float(np.max(np.abs(gram - ident))))
        lambdas.append(lam.copy())
        isometries.append(u)
    if worst > max(1e-8, 100.0 * tol):
        raise ArithmeticError(f"decomposition failed: isometry residual {worst:.3g}")
    return RfpDecomposition(lambdas, isometries, dec, worst)


# ---------------------------------------------------------------------------
# correlations independent of the distance


def _site_transfer(a: MpvTensor) -> np.ndarray:
    """F[i, i'] = A^i (x) conj(A^{i'}), shape (d, d, D^2, D^2)."""
    d, dd = a.d, a.D
    f = np.einsum("iab,jcd->ijacbd", a.entries, a.entries.conj())
    return f.reshape(d, d, dd * dd, dd * dd)


def _two_point_marginal(f: np.ndarray, e_pows: list[np.ndarray], delta: int, n: int):
    """Reduced state of sites {0, delta} on a ring of n sites."""
    d = f.shape[0]
    left, right = e_pows[delta - 1], e_pows[n - delta - 1]
    rho = np.einsum("ixab,bc,kycd,da->ikxy", f, left, f, right)
    return rho.reshape(d * d, d * d)


def is_cid(a: MpvTensor, n: int = 8, tol: float = DEFAULT_TOL) -> tuple[bool, float]:
    """Correlations independent of the distance on a ring of n sites.

    Equivalent to the reduced state of two single-site regions (and, for
    d <= 3, two adjacent-pair regions) being independent of their
    separation; checked via transfer-matrix contractions, no dense state.
    Only placements with at least one site between the regions compare:
    an idempotent transfer map fixes E^k for k >= 1 but says nothing about
    touching regions (the entangled-pair chain correlates adjacent sites
    yet is a fixed point).
    """
    if n < 6:
        raise ValueError("need n >= 6 to compare separations")
    e = TransferMap(a).matrix
    norm = np.trace(np.linalg.matrix_power(e, n))
    if abs(norm) < 1e-300:
        raise ArithmeticError("state has zero norm on this ring")
    e_pows = [np.eye(e.shape[0], dtype=np.complex128)]
    for _ in range(n):
        e_pows.append(e_pows[-1] @ e)
    f = _site_transfer(a)

    worst = 0.0
    ref = None
    for delta in range(2, n - 1):
        rho = _two_point_marginal(f, e_pows, delta, n) / norm
        if ref is None:
            ref = rho
        else:
            worst = max(worst, float(np.max(np.abs(rho - ref))))

    if a.d <= 3:
        d, dd2 = a.d, e.shape[0]
        g = np.einsum("ixab,jybc->ijxyac", f.reshape(a.d, a.d, dd2, dd2), f).reshape(
            d * d, d * d, dd2, dd2
        )
        ref2 = None
        for delta in range(3, n - 4):
            left, right = e_pows[delta - 2], e_pows[n - delta - 2]
            rho2 = np.einsum("pxab,bc,qycd,da->pqxy", g, left, g, right) / norm
            if ref2 is None:
                ref2 = rho2
            else:
                worst = max(worst, float(np.max(np.abs(rho2 - ref2))))
    return worst < max(1e-8, 100.0 * tol), worst


def is_locally_orthogonal(
    a: MpvTensor | CanonicalDecomposition, tol: float = DEFAULT_TOL
) -> tuple[bool, float]:
    """Do all pairs of normal blocks have vanishing mixed transfer map?"""
    dec = canonical_form(a, tol) if isinstance(a, MpvTensor) else a
    worst = 0.0
    for j in range(len(dec.bnt)):
        for k in range(j + 1, len(dec.bnt)):
            mixed = TransferMap(dec.bnt[j], dec.bnt[k]).matrix
            worst = max(worst, float(np.max(np.abs(mixed))))
    return worst < max(1e-8, 100.0 * tol), worst


# ---------------------------------------------------------------------------
# parent Hamiltonians


def _cyclic_perm(d: int, n: int, shift: int) -> np.ndarray:
    """Basis permutation sending site k to site k+shift (mod n)."""
    t = np.arange(d**n).reshape((d,) * n)
    axes = [(k - shift) % n for k in range(n)]
    return np.transpose(t, axes).reshape(-1)


def _embed(op: np.ndarray, span: int, d: int, n: int, site: int) -> np.ndarray:
    full = np.kron(op, np.eye(d ** (n - span), dtype=np.complex128))
    if site % n == 0:
        return full
    perm = _cyclic_perm(d, n, site % n)
    return full[np.ix_(perm, perm)]


@dataclass
class ParentHamiltonian:
    L: int
    p: np.ndarray  # projector on the generating subspace S_L
    p_perp: np.ndarray
    commuting: bool
    commutator_norm: float
    parent: bool
    ground_dims: dict[int, int] = field(default_factory=dict)
    expected_dims: dict[int, int] = field(default_factory=dict)
    s_dim: int = 0


def parent_hamiltonian(
    a: MpvTensor,
    L: int = 2,
    n_check: int = 8,
    tol: float = DEFAULT_TOL,
    max_dense_dim: int = 4096,
) -> ParentHamiltonian:
    """Range-L parent Hamiltonian H = sum_j tau_j(1 - P_L) on a ring.

    P_L projects onto the length-L open-boundary vectors of the tensor;
    commutation is checked for every overlap of two translated terms, and
    parenthood (= ground space equals the span of the normal blocks' ring
    states) is verified densely for N = L+1 .. n_check within the dense cap.
    """
    d = a.d
    s = open_chain_vectors(a, L)
    u, sv, vh = np.linalg.svd(s, full_matrices=False)
    basis = vh[sv > max(tol, 1e-12) * sv[0]]
    s_dim = basis.shape[0]
    if s_dim >= d**L:
        raise ValueError(f"no complement: S_{L} spans the whole {d**L}-dim space")
    p = basis.conj().T @ basis
    p_perp = np.eye(d**L, dtype=np.complex128) - p

    comm = 0.0
    for j in range(1, L):
        n_loc = L + j
        o1 = _embed(p, L, d, n_loc, 0)
        o2 = _embed(p, L, d, n_loc, j)
        comm = max(comm, float(np.linalg.norm(o1 @ o2 - o2 @ o1, 2)))
    commuting = comm < max(1e-8, 100.0 * tol)

    dec = canonical_form(a, tol)
    if dec.blocking_factor != 1:
        raise ValueError("input has periodic structure; block it away first")
    parent = True
    ground_dims: dict[int, int] = {}
    expected_dims: dict[int, int] = {}
    for n in range(L + 1, n_check + 1):
        if d**n > max_dense_dim:
            break
        h = np.zeros((d**n, d**n), dtype=np.complex128)
        for j in range(n):
            h += _embed(p_perp, L, d, n, j)
        evals = np.linalg.eigvalsh(h)
        kdim = int(np.sum(evals < 1e-8))
        ground_dims[n] = kdim
        ring = np.array([mpv_dense(rep, n) for rep in dec.bnt])
        sv2 = np.linalg.svd(ring, compute_uv=False)
        edim = int(np.sum(sv2 > 1e-10 * max(sv2[0], 1e-300)))
        expected_dims[n] = edim
        annihilated = float(np.max(np.abs(h @ ring.conj().T))) if ring.size else 0.0
        scale = float(np.max(np.abs(ring))) if ring.size else 1.0
        if kdim != edim or annihilated > max(1e-8, 100.0 * tol) * max(scale, 1.0):
            parent = False
    return ParentHamiltonian(
        L, p, p_perp, commuting, comm, parent, ground_dims, expected_dims, s_dim
    )


# ---------------------------------------------------------------------------
# entanglement entropy profile


def entropy_profile_pure(
    a: MpvTensor, n: int, tol: float = 1e-8, cap: int = MAX_PURE_AMPLITUDES
) -> tuple[list[float], bool]:
    """Block entropies S_L, L = 1..n-1, of the normalized ring state, and a
    saturation flag (all S_L for L <= n/2 equal within tol)."""
    v = mpv_dense(a, n, cap=cap)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        raise ArithmeticError("zero state")
    v = v / nrm
    profile = []
    for L in range(1, n):
        m = v.reshape(a.d**L, a.d ** (n - L))
        sv = np.linalg.svd(m, compute_uv=False)
        profile.append(von_neumann_entropy(sv**2))
    half = profile[: n // 2]
    sal = max(half) - min(half) < tol
    return profile, sal


# ---------------------------------------------------------------------------
# decorrelation vs commuting projectors


@dataclass
class DecorrelationResult:
    decorrelated: bool
    deviation: float
    commuting: bool
    projector_identity: float  # || P_AX P_XB - P ||
    commutator: float


def _support_projector(h: np.ndarray, cut: float = 1e-10) -> np.ndarray:
    vals, vecs = np.linalg.eigh((h + h.conj().T) / 2.0)
    keep = vals > cut * max(np.max(np.abs(vals)), 1e-300)
    v = vecs[:, keep]
    return v @ v.conj().T


def decorrelation_check(
    basis: np.ndarray, dims: tuple[int, int, int], tol: float = DEFAULT_TOL
) -> DecorrelationResult:
    """For a subspace K of H_A (x) H_X (x) H_B: are A and B decorrelated
    (P O_A P_perp O_B P = 0 for all single-region operators), and do the
    support projectors of the AX / XB marginals commute and intersect to P?

    ``basis`` holds orthonormal rows spanning K.
    """
    da, dx, db = dims
    n = da * dx * db
    basis = np.atleast_2d(basis)
    if basis.shape[1] != n:
        raise ValueError("basis length does not match the partition dims")
    gram = basis @ basis.conj().T
    if np.max(np.abs(gram - np.eye(basis.shape[0]))) > 1e-8:
        raise ValueError("basis rows are not orthonormal")
    p = basis.conj().T @ basis
    p_perp = np.eye(n, dtype=np.complex128) - p

    dev = 0.0
    eye_x = np.eye(dx)
    eye_b = np.eye(db)
    eye_a = np.eye(da)
    for r in range(da):
        for c in range(da):
            ea = np.zeros((da, da))
            ea[r, c] = 1.0
            oa = np.kron(np.kron(ea, eye_x), eye_b)
            left = p @ oa @ p_perp
            for r2 in range(db):
                for c2 in range(db):
                    eb = np.zeros((db, db))
                    eb[r2, c2] = 1.0
                    ob = np.kron(np.kron(eye_a, eye_x), eb)
                    dev = max(dev, float(np.max(np.abs(left @ ob @ p))))
    decorrelated = dev < max(1e-8, 100.0 * tol)

    # marginal support projectors
    rho = p / np.trace(p).real
    rho_ax = np.trace(rho.reshape(da * dx, db, da * dx, db), axis1=1, axis2=3)
    rho_xb = np.trace(rho.reshape(da, dx * db, da, dx * db), axis1=0, axis2=2)
    p_ax = np.kron(_support_projector(rho_ax), eye_b)
    p_xb = np.kron(eye_a, _support_projector(rho_xb))
    comm = float(np.linalg.norm(p_ax @ p_xb - p_xb @ p_ax, 2))
    ident = float(np.linalg.norm(p_ax @ p_xb - p, 2))
    commuting = comm < max(1e-8, 100.0 * tol) and ident < max(1e-8, 100.0 * tol)
    return DecorrelationResult(decorrelated, dev, commuting, ident, comm)
