"""Canonical form of matrix-product tensors.

Every tensor A decomposes (after discarding parts that generate identically
zero families, and possibly after blocking away a periodic structure) as

    A^i  ~  (+)_q  w_q  X_q  B_{j_q}^i  X_q^{-1}

where the B_j are pairwise gauge-inequivalent *normal* tensors (no common
invariant subspace, unique peripheral transfer eigenvalue 1) kept in
trace-preserving form with a diagonal positive fixed point, w_q are complex
weights, and X_q invertible gauges.  "~" means: both sides generate the same
vectors on every ring size.

The decomposition is found by recursively peeling invariant subspaces off the
completely positive transfer map; candidates for invariant subspaces come
from rank-deficient (or deliberately singularized) positive fixed points and
are always verified directly against the matrices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .config import DEFAULT_TOL
from .tensors import MpvTensor, TransferMap, block, direct_sum_tensors, transfer_map

__all__ = [
    "NormalityCertificate",
    "InjectivityReport",
    "GaugeResult",
    "BlockEntry",
    "CanonicalDecomposition",
    "BlockInjectiveResult",
    "EquivalenceVerdict",
    "is_normal",
    "is_injective",
    "canonical_form",
    "to_cfii",
    "find_gauge",
    "fundamental_theorem_check",
    "to_block_injective",
    "match_power_sums",
]


# ---------------------------------------------------------------------------
# small linear-algebra helpers


def _herm(x: np.ndarray) -> np.ndarray:
    return (x + x.conj().T) / 2.0


def _vec_eye(d: int) -> np.ndarray:
    return np.eye(d, dtype=np.complex128).reshape(-1)


def _spectral_projector(e: np.ndarray, select) -> tuple[np.ndarray, int]:
    """Oblique spectral projector onto the eigenvalue cluster chosen by select.

    Returns (P, k) with k the cluster size; P satisfies P @ e = e @ P and
    P @ P = P (up to conditioning of the cluster separation).
    """
    n = e.shape[0]
    t, z, sdim = scipy.linalg.schur(e, output="complex", sort=select)
    k = int(sdim)
    if k == 0:
        return np.zeros_like(e), 0
    if k == n:
        return np.eye(n, dtype=np.complex128), n
    t11, t12, t22 = t[:k, :k], t[:k, k:], t[k:, k:]
    y = scipy.linalg.solve_sylvester(t11, -t22, t12)
    p_mid = np.zeros((n, n), dtype=np.complex128)
    p_mid[:k, :k] = np.eye(k)
    p_mid[:k, k:] = y
    return z @ p_mid @ z.conj().T, k


def _support_basis(h: np.ndarray, rel_cut: float) -> np.ndarray:
    """Orthonormal basis (columns) of the positive support of a Hermitian h."""
    vals, vecs = np.linalg.eigh(_herm(h))
    top = np.max(np.abs(vals)) if vals.size else 0.0
    keep = vals > rel_cut * max(top, 1e-300)
    return vecs[:, keep]


def _orth_complement(v: np.ndarray) -> np.ndarray:
    d = v.shape[0]
    q, _ = np.linalg.qr(np.hstack([v, np.eye(d, dtype=np.complex128)]))
    return q[:, v.shape[1] :]


def _subspace_residual(mats: np.ndarray, v: np.ndarray) -> float:
    """max_i || (1 - P) A^i P || with P the projector on span(v)."""
    vp = _orth_complement(v)
    if v.size == 0 or vp.size == 0:
        return np.inf
    return max(np.linalg.norm(vp.conj().T @ m @ v) for m in mats)


# ---------------------------------------------------------------------------
# invariant-subspace search


class _Periodic(Exception):
    def __init__(self, period: int):
        self.period = period


def _find_invariant_subspace(mats: np.ndarray, tol: float) -> np.ndarray | None:
    """Search an invariant subspace of radius-normalized matrices.

    Returns an orthonormal column basis V with A^i span(V) <= span(V), or
    None when the matrices are certified normal.  Raises _Periodic(p) when
    the transfer spectrum shows a p-periodic phase structure instead.
    """
    d = mats.shape[1]
    if d == 1:
        return None
    scale = float(np.max(np.abs(mats)))
    e = TransferMap(MpvTensor(mats)).matrix
    vals = np.linalg.eigvals(e)
    r = float(np.max(np.abs(vals)))
    en = e / r
    vals = vals / r

    cluster_tol = max(1e-8, 100.0 * tol)
    verify_tol = max(1e-8, 100.0 * tol) * max(scale, 1.0)
    in_cluster = np.abs(vals - 1.0) < cluster_tol
    n_cluster = int(np.sum(in_cluster))

    p1, _ = _spectral_projector(en, lambda lam: abs(lam - 1.0) < cluster_tol)
    z = _herm((p1 @ _vec_eye(d)).reshape(d, d))
    candidates: list[np.ndarray] = []

    zv = _support_basis(z, 1e-10)
    if 0 < zv.shape[1] < d:
        candidates.append(zv)

    # left fixed point: its kernel is invariant under the A^i themselves
    p1l, _ = _spectral_projector(en.conj().T, lambda lam: abs(lam - 1.0) < cluster_tol)
    y = _herm((p1l @ _vec_eye(d)).reshape(d, d))
    yvals, yvecs = np.linalg.eigh(y)
    ytop = np.max(np.abs(yvals))
    ker = yvecs[:, np.abs(yvals) < 1e-10 * max(ytop, 1e-300)]
    if 0 < ker.shape[1] < d:
        candidates.append(ker)

    # degenerate fixed space: singularize a full-rank fixed point
    if n_cluster >= 2 and not candidates:
        zvals, zvecs = np.linalg.eigh(z)
        if np.min(zvals) > 1e-10 * np.max(np.abs(zvals)):
            z_isqrt = zvecs @ np.diag(zvals**-0.5) @ zvecs.conj().T
            hs: list[np.ndarray] = []
            evals2, evecs2 = np.linalg.eig(en)
            for idx in np.where(np.abs(evals2 - 1.0) < cluster_tol)[0]:
                m = evecs2[:, idx].reshape(d, d)
                hs.append(_herm(m))
                hs.append(_herm(1j * m))
            # defective-at-1 escape hatch: the drift direction is also fixed
            drift = _herm((en @ z.reshape(-1)).reshape(d, d) - z)
            if np.linalg.norm(drift) > 1e-9 * np.linalg.norm(z):
                hs.append(drift)
            for h in hs:
                # remove the Z component so the combination is genuinely new
                coeff = np.vdot(z.reshape(-1), h.reshape(-1)) / np.vdot(
                    z.reshape(-1), z.reshape(-1)
                )
                h_perp = h - coeff.real * z
                if np.linalg.norm(h_perp) < 1e-9 * np.linalg.norm(h):
                    continue
                g = _herm(z_isqrt @ h_perp @ z_isqrt)
                gvals = np.linalg.eigvalsh(g)
                mu = gvals[np.argmax(np.abs(gvals))]
                if abs(mu) < 1e-12:
                    continue
                w = _herm(z - (zvecs @ np.diag(zvals**0.5) @ zvecs.conj().T)
                          @ (g / mu)
                          @ (zvecs @ np.diag(zvals**0.5) @ zvecs.conj().T))
                wv = _support_basis(w, 1e-8)
                if 0 < wv.shape[1] < d:
                    candidates.append(wv)

    for v in candidates:
        if _subspace_residual(mats, v) < verify_tol:
            return v

    # periodic phases e^{2 pi i q / p} on the peripheral circle
    peripheral = vals[np.abs(vals) > 1.0 - max(1e-8, 10.0 * tol)]
    periods = []
    for lam in peripheral:
        if abs(lam - 1.0) < cluster_tol:
            continue
        for q in range(2, d * d + 2):
            if abs(lam**q - 1.0) < 1e-6:
                periods.append(q)
                break
        else:
            raise ArithmeticError(
                f"peripheral transfer eigenvalue {lam} is not a root of unity"
            )
    if periods:
        raise _Periodic(math.lcm(*periods))

    if n_cluster >= 2 and not candidates:
        raise ArithmeticError("degenerate fixed space but no invariant subspace found")
    return None


# ---------------------------------------------------------------------------
# normality / injectivity


@dataclass
class NormalityCertificate:
    normal: bool
    reason: str  # "ok" | "zero" | "invariant-subspace" | "periodic" | "degenerate"
    spectral_radius: float
    projector: np.ndarray | None = None
    peripheral: np.ndarray | None = None

    def __bool__(self) -> bool:
        return self.normal


def is_normal(a: MpvTensor, tol: float = DEFAULT_TOL) -> NormalityCertificate:
    mats = a.entries
    scale = float(np.max(np.abs(mats)))
    if scale == 0.0:
        return NormalityCertificate(False, "zero", 0.0)
    e = transfer_map(a)
    r = e.spectral_radius()
    if np.sqrt(r) < 10.0 * tol * scale:
        return NormalityCertificate(False, "zero", r)
    try:
        v = _find_invariant_subspace(mats / np.sqrt(r), tol)
    except _Periodic:
        return NormalityCertificate(
            False, "periodic", r, peripheral=e.peripheral_eigenvalues(tol) / r
        )
    if v is not None:
        return NormalityCertificate(
            False, "invariant-subspace", r, projector=v @ v.conj().T
        )
    return NormalityCertificate(True, "ok", r, peripheral=e.peripheral_eigenvalues(tol) / r)


@dataclass
class InjectivityReport:
    injective: bool
    length: int | None
    rank: int
    target_rank: int


def _span_growth(mats: np.ndarray, target: int, max_len: int, tol: float):
    """Iterate S_{L+1} = span(S_L . A^i); report first L with full rank."""
    d_virt = mats.shape[1]
    basis = mats.reshape(mats.shape[0], -1)
    ranks = []

    def orth(rows: np.ndarray) -> np.ndarray:
        u, s, vh = np.linalg.svd(rows, full_matrices=False)
        keep = s > max(tol, 1e-12) * (s[0] if s.size else 1.0)
        return vh[keep]

    basis = orth(basis)
    for length in range(1, max_len + 1):
        ranks.append(basis.shape[0])
        if basis.shape[0] >= target:
            return length, basis.shape[0], ranks
        if length == max_len:
            break
        prod = np.einsum(
            "rab,ibc->riac", basis.reshape(-1, d_virt, d_virt), mats
        ).reshape(-1, d_virt * d_virt)
        basis = orth(prod)
    return None, basis.shape[0], ranks


def is_injective(a: MpvTensor, tol: float = DEFAULT_TOL) -> InjectivityReport:
    """Minimal L with span{A^{i1}..A^{iL}} = all D x D matrices (cap D^4)."""
    target = a.D * a.D
    length, rank, _ = _span_growth(a.entries, target, a.D**4, tol)
    return InjectivityReport(length is not None, length, rank, target)


# ---------------------------------------------------------------------------
# CFII of a single normal block


def _dominant_fixed_point(e: np.ndarray, d: int) -> np.ndarray:
    """Hermitian positive fixed point of a normal block's transfer matrix."""
    vals, vecs = np.linalg.eig(e)
    idx = int(np.argmax(np.abs(vals)))
    m = _herm(vecs[:, idx].reshape(d, d))
    if np.trace(m).real < 0:
        m = -m
    return m


def _cfii_block(mats: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bring a radius-1 normal block to trace-preserving form.

    Returns (cfii_mats, lam, t) with cfii = t @ mats @ t^{-1} (per matrix),
    sum_i C^{i dag} C^i = 1, and fixed point sum_i C^i diag(lam) C^{i dag} =
    diag(lam), lam sorted descending with sum(lam) = 1.
    """
    d = mats.shape[1]
    e = TransferMap(MpvTensor(mats)).matrix
    y = _dominant_fixed_point(e.conj().T, d)
    yvals, yvecs = np.linalg.eigh(y)
    if np.min(yvals) < tol * np.max(yvals):
        raise ArithmeticError("left fixed point of a normal block is singular")
    y_sqrt = yvecs @ np.diag(yvals**0.5) @ yvecs.conj().T
    y_isqrt = yvecs @ np.diag(yvals**-0.5) @ yvecs.conj().T
    b = np.einsum("ab,ibc,cd->iad", y_sqrt, mats, y_isqrt)
    eb = TransferMap(MpvTensor(b)).matrix
    z = _dominant_fixed_point(eb, d)
    zvals, zvecs = np.linalg.eigh(z)
    order = np.argsort(zvals)[::-1]
    zvals, zvecs = zvals[order], zvecs[:, order]
    c = np.einsum("ab,ibc,cd->iad", zvecs.conj().T, b, zvecs)
    lam = zvals / np.sum(zvals)
    t = zvecs.conj().T @ y_sqrt
    return c, lam, t


def _phase_fix(mats: np.ndarray) -> tuple[np.ndarray, complex]:
    """Rotate so the largest-magnitude entry is real positive.

    Returns (rotated, phase) with rotated = phase * mats.
    """
    flat = mats.reshape(-1)
    idx = int(np.argmax(np.abs(flat)))
    ph = flat[idx] / abs(flat[idx])
    return mats / ph, 1.0 / ph


# ---------------------------------------------------------------------------
# gauge matching


@dataclass
class GaugeResult:
    found: bool
    phase: float = 0.0
    x: np.ndarray | None = None
    residual: float = np.inf


def _normalize_gauge(x: np.ndarray) -> np.ndarray:
    d = x.shape[0]
    det = np.linalg.det(x)
    if abs(det) > 0:
        x = x / abs(det) ** (1.0 / d)
    flat = x.reshape(-1)
    idx = int(np.argmax(np.abs(flat)))
    ph = flat[idx] / abs(flat[idx])
    return x / ph


def find_gauge(a: MpvTensor, b: MpvTensor, tol: float = DEFAULT_TOL) -> GaugeResult:
    """Search phase phi and invertible X with B^i = e^{i phi} X A^i X^{-1}.

    Both tensors must be normal with transfer spectral radius 1 (canonical
    blocks are); the gauge, when it exists, is read off the peripheral
    eigenvector of the mixed transfer matrix sum_i A^i (x) conj(B^i).
    """
    if a.d != b.d or a.D != b.D:
        return GaugeResult(False)
    d = a.D
    mixed = TransferMap(a, b).matrix
    vals, vecs = np.linalg.eig(mixed)
    idx = int(np.argmax(np.abs(vals)))
    lam = vals[idx]
    if abs(lam) < 1.0 - max(1e-7, 1000.0 * tol):
        return GaugeResult(False)
    phase = float(-np.angle(lam))
    m = vecs[:, idx].reshape(d, d)
    ea = TransferMap(a).matrix
    ra = _dominant_fixed_point(ea, d)
    rvals, rvecs = np.linalg.eigh(ra)
    if np.min(rvals) < 1e-12 * np.max(np.abs(rvals)):
        return GaugeResult(False)
    ra_inv = rvecs @ np.diag(1.0 / rvals) @ rvecs.conj().T
    x = m.conj().T @ ra_inv
    if abs(np.linalg.det(x)) < 1e-12:
        return GaugeResult(False)
    x = _normalize_gauge(x)
    x_inv = np.linalg.inv(x)
    scale = max(float(np.max(np.abs(b.entries))), 1e-300)
    resid = (
        np.max(np.abs(b.entries - np.exp(1j * phase) * np.einsum(
            "ab,ibc,cd->iad", x, a.entries, x_inv)))
        / scale
    )
    found = resid < max(1e-8, 100.0 * tol)
    return GaugeResult(found, phase, x if found else None, float(resid))


# ---------------------------------------------------------------------------
# canonical form


@dataclass
class BlockEntry:
    bnt_index: int
    weight: complex
    gauge: np.ndarray  # block matrices = weight * gauge @ B_j @ gauge^{-1}

    @property
    def dim(self) -> int:
        return self.gauge.shape[0]


@dataclass
class CanonicalDecomposition:
    bnt: list[MpvTensor]
    fixed_points: list[np.ndarray]  # diagonal of the CFII fixed point, per BNT
    blocks: list[BlockEntry]
    blocking_factor: int
    tol: float = DEFAULT_TOL
    notes: list[str] = field(default_factory=list)

    @property
    def weights(self) -> np.ndarray:
        return np.array([b.weight for b in self.blocks])

    @property
    def scale(self) -> float:
        w = self.weights
        return float(np.max(np.abs(w))) if w.size else 0.0

    @property
    def normalized_weights(self) -> np.ndarray:
        s = self.scale
        return self.weights / s if s > 0 else self.weights

    def weights_of(self, j: int) -> list[complex]:
        return [b.weight for b in self.blocks if b.bnt_index == j]

    def bnt_direct_sum(self) -> MpvTensor:
        return direct_sum_tensors(self.bnt)

    def reassemble(self) -> MpvTensor:
        """Block-diagonal tensor generating the same family as the input
        (after blocking by blocking_factor)."""
        if not self.blocks:
            raise ValueError("empty decomposition (the family is identically zero)")
        parts = []
        for b in self.blocks:
            x_inv = np.linalg.inv(b.gauge)
            mats = b.weight * np.einsum(
                "ab,ibc,cd->iad", b.gauge, self.bnt[b.bnt_index].entries, x_inv
            )
            parts.append(MpvTensor(mats))
        return direct_sum_tensors(parts)


def _decompose(mats: np.ndarray, tol: float) -> list[tuple[float, np.ndarray]]:
    """Recursive peel; returns [(weight > 0, radius-1 matrices)], may raise
    _Periodic."""
    scale = float(np.max(np.abs(mats)))
    if scale == 0.0:
        return []
    e = TransferMap(MpvTensor(mats)).matrix
    r = float(np.max(np.abs(np.linalg.eigvals(e)))) if e.size else 0.0
    if np.sqrt(r) < 10.0 * tol * scale:
        return []  # nilpotent family: every ring trace vanishes
    bn = mats / np.sqrt(r)
    v = _find_invariant_subspace(bn, tol)
    if v is None:
        return [(np.sqrt(r), bn)]
    vp = _orth_complement(v)
    sub = np.einsum("ab,ibc,cd->iad", v.conj().T, bn, v)
    comp = np.einsum("ab,ibc,cd->iad", vp.conj().T, bn, vp)
    out = []
    for w, m in _decompose(sub, tol) + _decompose(comp, tol):
        out.append((np.sqrt(r) * w, m))
    return out


def canonical_form(a: MpvTensor, tol: float = DEFAULT_TOL) -> CanonicalDecomposition:
    notes: list[str] = []
    p_total = 1
    work = a
    for _ in range(8):
        try:
            comps = _decompose(work.entries, tol)
            break
        except _Periodic as sig:
            p_total *= sig.period
            if a.d**p_total > 2**16 or p_total > 64:
                raise ArithmeticError(
                    f"periodic structure requires blocking beyond the cap (p={p_total})"
                )
            work = block(a, p_total)
            notes.append(f"blocked by {sig.period} to remove periodic phases")
    else:
        raise ArithmeticError("periodic blocking did not stabilize")

    if not comps:
        return CanonicalDecomposition([], [], [], p_total, tol, notes + ["zero family"])

    max_w = max(w for w, _ in comps)
    comps = [(w, m) for w, m in comps if w > tol * max_w]

    bnt: list[MpvTensor] = []
    lams: list[np.ndarray] = []
    blocks: list[BlockEntry] = []
    for w, mats in comps:
        cf_mats, lam, t = _cfii_block(mats, tol)
        t_inv = np.linalg.inv(t)
        cand = MpvTensor(cf_mats)
        assigned = False
        for j, rep in enumerate(bnt):
            g = find_gauge(rep, cand, tol)
            if g.found:
                # mats = t^{-1} cand t = e^{i phi} (t^{-1} X) rep (t^{-1} X)^{-1}
                gauge = _normalize_gauge(t_inv @ g.x)
                blocks.append(BlockEntry(j, w * np.exp(1j * g.phase), gauge))
                assigned = True
                break
        if not assigned:
            fixed, ph = _phase_fix(cf_mats)
            bnt.append(MpvTensor(fixed))
            lams.append(lam)
            # cand = (1/ph) * fixed, so mats = t^{-1} (1/ph) fixed t
            blocks.append(BlockEntry(len(bnt) - 1, w / ph, _normalize_gauge(t_inv)))

    def sort_key(b: BlockEntry):
        rep = bnt[b.bnt_index].entries.reshape(-1)
        finger = tuple(np.round(rep[:6].real, 6)) + tuple(np.round(rep[:6].imag, 6))
        return (-abs(b.weight), b.dim, finger, -np.angle(b.weight))

    blocks.sort(key=sort_key)
    return CanonicalDecomposition(bnt, lams, blocks, p_total, tol, notes)


def to_cfii(
    a: MpvTensor | CanonicalDecomposition, tol: float = DEFAULT_TOL
) -> tuple[MpvTensor, list[np.ndarray], CanonicalDecomposition]:
    """Weighted direct sum of the trace-preserving blocks (gauges dropped).

    The result generates the same dense vectors as the input on every ring
    size, and carries one diagonal positive fixed point per block.
    """
    dec = a if isinstance(a, CanonicalDecomposition) else canonical_form(a, tol)
    if not dec.blocks:
        raise ValueError("zero family has no trace-preserving form")
    parts = [
        MpvTensor(b.weight * dec.bnt[b.bnt_index].entries) for b in dec.blocks
    ]
    lams = [dec.fixed_points[b.bnt_index] for b in dec.blocks]
    return direct_sum_tensors(parts), lams, dec


# ---------------------------------------------------------------------------
# block injectivity


@dataclass
class BlockInjectiveResult:
    tensor: MpvTensor  # the blocked direct sum of the basis-of-normal-tensors
    length: int
    decomposition: CanonicalDecomposition
    rank: int
    target_rank: int


def to_block_injective(a: MpvTensor, tol: float = DEFAULT_TOL) -> BlockInjectiveResult:
    """Block until products of the BNT direct sum span (+)_j M_{D_j}."""
    dec = a if isinstance(a, CanonicalDecomposition) else canonical_form(a, tol)
    if not dec.bnt:
        raise ValueError("zero family cannot be blocked to injectivity")
    t = dec.bnt_direct_sum()
    target = sum(rep.D**2 for rep in dec.bnt)
    max_len = 3 * t.D**5
    length, rank, _ = _span_growth(t.entries, target, max_len, tol)
    if length is None:
        raise ArithmeticError(
            f"span rank stalled at {rank} < {target} after {max_len} blockings"
        )
    return BlockInjectiveResult(block(t, length), length, dec, rank, target)


# ---------------------------------------------------------------------------
# weight multisets and the family-equivalence verdict


def match_power_sums(
    mu, nu, tol: float = DEFAULT_TOL
) -> bool:
    """Equality of two complex weight multisets via power sums.

    Two multisets of sizes x_a, x_b coincide iff their power sums agree for
    all exponents up to max(x_a, x_b).
    """
    mu = np.asarray(mu, dtype=np.complex128)
    nu = np.asarray(nu, dtype=np.complex128)
    top = max(len(mu), len(nu))
    if top == 0:
        return True
    scale = max(np.max(np.abs(mu), initial=0.0), np.max(np.abs(nu), initial=0.0))
    if scale == 0.0:
        return True
    mu, nu = mu / scale, nu / scale
    for n in range(1, top + 1):
        if abs(np.sum(mu**n) - np.sum(nu**n)) > max(1e-8, 100.0 * tol) * top:
            return False
    return True


@dataclass
class EquivalenceVerdict:
    verdict: str  # "equal" | "proportional" | "inequivalent"
    ratio: complex | None = None  # V_N(B) = ratio^N V_N(A) when proportional
    matching: dict[int, int] | None = None  # BNT index of B -> BNT index of A
    detail: str = ""


def fundamental_theorem_check(
    a: MpvTensor, b: MpvTensor, tol: float = DEFAULT_TOL
) -> EquivalenceVerdict:
    """Decide whether two tensors generate equal or proportional families.

    Matches the normal blocks of the two canonical forms pairwise by gauge,
    then compares per-block weight multisets by power sums.
    """
    dec_a = canonical_form(a, tol)
    dec_b = canonical_form(b, tol)
    if dec_a.blocking_factor != dec_b.blocking_factor:
        p = math.lcm(dec_a.blocking_factor, dec_b.blocking_factor)
        dec_a = canonical_form(block(a, p), tol)
        dec_b = canonical_form(block(b, p), tol)
        if dec_a.blocking_factor != 1 or dec_b.blocking_factor != 1:
            return EquivalenceVerdict("inequivalent", detail="periodic structures differ")
    if len(dec_a.bnt) != len(dec_b.bnt):
        return EquivalenceVerdict("inequivalent", detail="different number of normal blocks")
    if not dec_a.bnt:
        return EquivalenceVerdict("equal", ratio=1.0, matching={}, detail="both zero")

    matching: dict[int, int] = {}
    phases: dict[int, float] = {}
    used: set[int] = set()
    for k, rep_b in enumerate(dec_b.bnt):
        for j, rep_a in enumerate(dec_a.bnt):
            if j in used:
                continue
            g = find_gauge(rep_a, rep_b, tol)
            if g.found:
                matching[k] = j
                phases[k] = g.phase
                used.add(j)
                break
        else:
            return EquivalenceVerdict(
                "inequivalent", detail=f"block {k} of the second tensor has no partner"
            )

    # effective weights of B expressed on A's representatives
    mu_by_j = {j: np.array(dec_a.weights_of(j)) for j in range(len(dec_a.bnt))}
    nu_by_j = {
        matching[k]: np.array(dec_b.weights_of(k)) * np.exp(1j * phases[k])
        for k in matching
    }
    if all(match_power_sums(mu_by_j[j], nu_by_j[j], tol) for j in mu_by_j):
        return EquivalenceVerdict("equal", ratio=1.0, matching=matching)

    # proportionality: nu = z * mu for one common complex z
    j0 = max(mu_by_j, key=lambda j: np.max(np.abs(mu_by_j[j]), initial=0.0))
    mu0 = mu_by_j[j0][np.argmax(np.abs(mu_by_j[j0]))]
    candidates = [nu / mu0 for nu in nu_by_j[j0]]
    for z in candidates:
        if abs(z) == 0:
            continue
        if all(
            match_power_sums(z * mu_by_j[j], nu_by_j[j], tol) for j in mu_by_j
        ):
            verdict = "equal" if abs(z - 1.0) < max(1e-8, 100.0 * tol) else "proportional"
            return EquivalenceVerdict(verdict, ratio=z, matching=matching)
    return EquivalenceVerdict("inequivalent", matching=matching, detail="weights differ")
