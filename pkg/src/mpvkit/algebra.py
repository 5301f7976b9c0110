"""Finite-dimensional *-algebra recovery.

Given a set of matrices, build an orthonormal basis of the *-algebra they
generate and a unitary that exhibits its Wedderburn form: a direct sum of
blocks, each a full matrix algebra acting on a first tensor factor and
trivially on a multiplicity factor.  Used to find the hidden site splits of
density operators that saturate strong subadditivity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["AlgebraBlock", "AlgebraDecomposition", "algebra_basis", "decompose_algebra"]


def _orth_matrices(mats: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal (Hilbert-Schmidt) basis of the span of a matrix stack."""
    rows = mats.reshape(mats.shape[0], -1)
    u, s, vh = np.linalg.svd(rows, full_matrices=False)
    keep = s > max(tol, 1e-12) * (s[0] if s.size else 1.0)
    d = mats.shape[1]
    return vh[keep].reshape(-1, d, mats.shape[2])


def algebra_basis(
    generators: np.ndarray | list[np.ndarray],
    tol: float = 1e-10,
    include_identity: bool = True,
    max_rounds: int = 30,
) -> np.ndarray:
    """Orthonormal basis of the *-algebra generated by the given matrices."""
    gens = np.asarray(generators, dtype=np.complex128)
    d = gens.shape[1]
    stack = [gens, gens.conj().transpose(0, 2, 1)]
    if include_identity:
        stack.append(np.eye(d, dtype=np.complex128)[None])
    basis = _orth_matrices(np.concatenate(stack), tol)
    for _ in range(max_rounds):
        prods = np.einsum("iab,jbc->ijac", basis, basis).reshape(-1, d, d)
        new = _orth_matrices(np.concatenate([basis, prods]), tol)
        if new.shape[0] == basis.shape[0]:
            return new
        basis = new
    raise ArithmeticError("algebra closure did not stabilize")


@dataclass
class AlgebraBlock:
    isometry: np.ndarray  # columns: orthonormal basis of the block, shape (d, m*n)
    m: int  # matrix factor dimension (the algebra acts fully here)
    n: int  # multiplicity factor dimension (the algebra acts trivially here)


@dataclass
class AlgebraDecomposition:
    blocks: list[AlgebraBlock]
    unitary: np.ndarray  # block isometries stacked; d x support_dim
    support_dim: int
    residual: float

    def block_form(self, a: np.ndarray, k: int) -> np.ndarray:
        """The m x m matrix representing a on block k (averaged over the
        multiplicity factor)."""
        b = self.blocks[k]
        restricted = b.isometry.conj().T @ a @ b.isometry
        return np.trace(restricted.reshape(b.m, b.n, b.m, b.n), axis1=1, axis2=3) / b.n


def _cluster(vals: np.ndarray, gap: float) -> list[np.ndarray]:
    order = np.argsort(vals)
    groups, cur = [], [order[0]]
    for idx in order[1:]:
        if vals[idx] - vals[cur[-1]] < gap:
            cur.append(idx)
        else:
            groups.append(np.array(cur))
            cur = [idx]
    groups.append(np.array(cur))
    return groups


def decompose_algebra(
    basis: np.ndarray, tol: float = 1e-8, seed: int = 7, retries: int = 8
) -> AlgebraDecomposition:
    """Wedderburn decomposition of a *-algebra given by an orthonormal basis.

    Returns per-block isometries V_k and dimensions (m_k, n_k) with
    V_k^dag a V_k = m(a) (x) 1_{n_k} for every algebra element a.  The
    blocks span the range of the algebra's unit (pass a basis containing
    the relevant support projector or the identity).
    """
    rng = np.random.default_rng(seed)
    r, d, _ = basis.shape

    # center: elements commuting with every basis element
    rows = []
    for b in basis:
        comm = np.einsum("iab,bc->iac", basis, b) - np.einsum("ab,ibc->iac", b, basis)
        rows.append(comm.reshape(r, -1).T)
    big = np.concatenate(rows)  # (r*d*d stacked) x r
    u, s, vh = np.linalg.svd(big, full_matrices=True)
    # Basis elements are HS-normalized, so commutators have O(1) scale; an
    # absolute floor keeps the center detectable when all commutators vanish.
    null = vh[np.sum(s > max(tol, 1e-10) * max(s[0] if s.size else 0.0, 1.0)) :].conj()

    last_err: Exception | None = None
    for _ in range(retries):
        try:
            return _decompose_once(basis, null, rng, tol)
        except ArithmeticError as err:  # degenerate random element; retry
            last_err = err
    raise ArithmeticError(f"algebra decomposition failed: {last_err}")


def _decompose_once(basis, null, rng, tol) -> AlgebraDecomposition:
    r, d, _ = basis.shape
    coeff = null.T @ rng.standard_normal(null.shape[0])
    z = np.einsum("i,iab->ab", coeff, basis)
    z = (z + z.conj().T) / 2.0
    # unit of the algebra: blocks live inside its range
    unit = np.einsum("i,iab->ab", np.einsum("iaa->i", basis).conj(), basis)
    unit_vals, unit_vecs = np.linalg.eigh((unit + unit.conj().T) / 2.0)
    supp = unit_vecs[:, np.abs(unit_vals) > 1e-8 * max(np.max(np.abs(unit_vals)), 1e-300)]
    z_s = supp.conj().T @ z @ supp
    vals, vecs = np.linalg.eigh(z_s)
    scale = max(np.max(np.abs(vals)), 1e-300)
    groups = _cluster(vals, 1e-6 * scale)

    blocks: list[AlgebraBlock] = []
    residual = 0.0
    for grp in groups:
        v = supp @ vecs[:, grp]  # candidate central block basis, d x dim
        dim = v.shape[1]
        restricted = np.einsum("ai,kab,bj->kij", v.conj(), basis, v)
        rank = np.linalg.matrix_rank(
            restricted.reshape(r, -1), tol=1e-8 * max(1.0, np.max(np.abs(restricted)))
        )
        m = int(round(np.sqrt(rank)))
        if m * m != rank or dim % m != 0:
            raise ArithmeticError(
                f"block of dim {dim} has algebra rank {rank}, not a square split"
            )
        n = dim // m
        if m == 1:
            blocks.append(AlgebraBlock(v, 1, n))
            continue
        # split the block into matrix factor x multiplicity factor
        sub = _orth_matrices(restricted, 1e-10)
        h = rng.standard_normal(sub.shape[0]) @ sub.reshape(sub.shape[0], -1)
        h = h.reshape(dim, dim)
        h = (h + h.conj().T) / 2.0
        hvals, hvecs = np.linalg.eigh(h)
        hgroups = _cluster(hvals, 1e-6 * max(np.max(np.abs(hvals)), 1e-300))
        if len(hgroups) != m or any(len(g) != n for g in hgroups):
            raise ArithmeticError("random element did not separate the factor")
        eig_bases = [hvecs[:, g] for g in hgroups]
        a2 = rng.standard_normal(sub.shape[0]) @ sub.reshape(sub.shape[0], -1)
        a2 = a2.reshape(dim, dim)
        cols = [eig_bases[0]]
        for i in range(1, m):
            link = eig_bases[i].conj().T @ a2 @ eig_bases[0]
            uu, ss, vvh = np.linalg.svd(link)
            if ss[-1] < 1e-8 * max(ss[0], 1e-300):
                raise ArithmeticError("linking element is singular")
            cols.append(eig_bases[i] @ (uu @ vvh))
        u_block = np.concatenate(cols, axis=1)  # (i, s) ordering
        blocks.append(AlgebraBlock(v @ u_block, m, n))

    # verify the block form on every basis element
    for b in basis:
        recon = np.zeros((d, d), dtype=np.complex128)
        total = 0.0
        for blk in blocks:
            restricted = blk.isometry.conj().T @ b @ blk.isometry
            mpart = np.trace(
                restricted.reshape(blk.m, blk.n, blk.m, blk.n), axis1=1, axis2=3
            ) / blk.n
            form = np.kron(mpart, np.eye(blk.n))
            total += np.linalg.norm(restricted - form) ** 2
            recon += blk.isometry @ form @ blk.isometry.conj().T
        total += np.linalg.norm(recon - b) ** 2
        residual = max(residual, np.sqrt(total))
    if residual > max(1e-7, 10 * tol) * max(1.0, float(np.max(np.abs(basis)))):
        raise ArithmeticError(f"block form residual {residual:.3g}")
    unitary = np.concatenate([blk.isometry for blk in blocks], axis=1)
    return AlgebraDecomposition(blocks, unitary, unitary.shape[1], residual)
