"""Seeded random and structured tensor constructions for property testing.

Every sampler takes either an integer seed or a ``numpy.random.Generator``
and is deterministic given it.  The constructions cover:

- generic complex tensors, normal tensors, gauges, and canonical-form
  direct sums for the pure-state round-trip suites;
- fixed-point normal tensors built from a positive spectrum, a physical
  isometry, and a virtual gauge;
- Hermitian MPDO tensors biased toward positivity (validated by
  post-selection on small rings);
- label-block MPDO families built from positive blocks eta_{k,h}, whose
  ring operators are direct sums over label strings of tensor products of
  the blocks (the structure recovered by ``extract_gsnnch``);
- character / group-representation MPDO families ``rho_N = sum_g U_g^{xN}``
  times an on-site commuting Gibbs factor, which are fixed points of the
  mixed renormalization flow and exercise the vertical algebra machinery.
"""

from __future__ import annotations

import numpy as np

from .canonical import is_normal
from .mpdo import validate_mpdo
from .tensors import MpdoTensor, MpvTensor, TransferMap, direct_sum_tensors

__all__ = [
    "rng_from",
    "random_tensor",
    "random_normal_tensor",
    "random_gauge",
    "random_unitary",
    "random_cf_tensor",
    "random_rfp_tensor",
    "random_mpdo",
    "random_eta_mpdo",
    "character_mpdo",
    "cyclic_characters",
    "random_rfp_mpdo",
    "rfp_mpdo_suite",
]


def rng_from(seed) -> np.random.Generator:
    """Accept an integer seed or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_tensor(d: int, D: int, seed) -> MpvTensor:
    """Generic complex tensor, normalized to unit transfer spectral radius."""
    rng = rng_from(seed)
    a = _complex_gaussian(rng, (d, D, D))
    r = TransferMap(MpvTensor(a)).spectral_radius()
    return MpvTensor(a / np.sqrt(max(r, 1e-300)))


def random_normal_tensor(d: int, D: int, seed, max_tries: int = 50) -> MpvTensor:
    """Random normal tensor with transfer spectral radius one."""
    rng = rng_from(seed)
    for _ in range(max_tries):
        a = random_tensor(d, D, rng)
        if is_normal(a).normal:
            return a
    raise RuntimeError(f"no normal tensor found in {max_tries} draws (d={d}, D={D})")


def random_gauge(D: int, seed, cond_cap: float = 50.0) -> np.ndarray:
    """Random invertible matrix with bounded condition number."""
    rng = rng_from(seed)
    while True:
        x = _complex_gaussian(rng, (D, D))
        if np.linalg.cond(x) < cond_cap:
            return x


def random_unitary(D: int, seed) -> np.ndarray:
    rng = rng_from(seed)
    q, r = np.linalg.qr(_complex_gaussian(rng, (D, D)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_cf_tensor(d: int, D: int, seed, gauge: bool = True) -> MpvTensor:
    """Random canonical-form tensor: a weighted direct sum of normal
    tensors partitioning the bond dimension, optionally conjugated by a
    global gauge."""
    rng = rng_from(seed)
    sizes = []
    left = D
    while left > 0:
        k = int(rng.integers(1, left + 1))
        sizes.append(k)
        left -= k
    blocks = []
    for k in sizes:
        a = random_normal_tensor(d, k, rng)
        w = float(rng.uniform(0.3, 1.0)) * np.exp(1j * float(rng.uniform(0, 2 * np.pi)))
        blocks.append(MpvTensor(w * a.entries))
    out = direct_sum_tensors(blocks)
    if gauge and D > 1:
        x = random_gauge(D, rng)
        out = MpvTensor(np.einsum("ab,ibc,cd->iad", x, out.entries, np.linalg.inv(x)))
    return out


def random_rfp_tensor(D: int, seed, d: int | None = None, gauge: bool = True) -> MpvTensor:
    """Fixed-point normal tensor X (sqrt(L) |j><k| sqrt(L)) X^{-1} dressed
    with a physical isometry, for a random positive spectrum L."""
    rng = rng_from(seed)
    d = D * D if d is None else d
    if d < D * D:
        raise ValueError("physical dimension must be at least D^2")
    lam = rng.uniform(0.2, 1.0, size=D)
    lam = lam / np.linalg.norm(lam)  # unit transfer spectral radius
    s = np.sqrt(lam)
    base = np.einsum("j,k,ja,kb->jkab", s, s, np.eye(D), np.eye(D)).reshape(D * D, D, D)
    iso = random_unitary(d, rng)[:, : D * D] if d > D * D else random_unitary(D * D, rng)
    a = np.einsum("ip,pab->iab", iso, base)
    if gauge and D > 1:
        x = random_gauge(D, rng)
        a = np.einsum("ab,ibc,cd->iad", x, a, np.linalg.inv(x))
    return MpvTensor(a)


def random_mpdo(
    d: int,
    D: int,
    seed,
    n_check: int = 6,
    strength: float | None = None,
    max_tries: int = 200,
) -> MpdoTensor:
    """Random Hermitian MPDO tensor with positive ring operators.

    Draws an identity-biased Hermitian perturbation and post-selects on
    positivity of the ring operators up to ``n_check`` sites.
    """
    rng = rng_from(seed)
    eye = np.einsum("ij,ab->ijab", np.eye(d), np.eye(D))
    for _ in range(max_tries):
        s = float(rng.uniform(0.05, 0.5)) if strength is None else strength
        g = _complex_gaussian(rng, (d, d, D, D))
        herm = (g + g.transpose(1, 0, 2, 3).conj()) / 2.0
        m = MpdoTensor(eye + s * herm)
        if validate_mpdo(m, n_list=tuple(range(2, n_check + 1))).positive:
            return m
    raise RuntimeError(f"no positive MPDO found in {max_tries} draws (d={d}, D={D})")


def _random_psd(rng: np.random.Generator, n: int) -> np.ndarray:
    g = _complex_gaussian(rng, (n, n))
    h = g @ g.conj().T
    return h / np.trace(h).real


def random_eta_mpdo(
    seed,
    n_labels: int = 2,
    max_split: int = 2,
    rank_one: bool = True,
) -> MpdoTensor:
    """Label-block MPDO built from positive blocks eta_{k,h}.

    Each site carries a label k with a (left, right) split dimension pair;
    the N-site ring operator is the direct sum over label strings of
    tensor products of the blocks, each block acting on the right half of
    one site and the left half of the next.  With ``rank_one`` the traces
    tr(eta_{k,h}) factorize as a_k * b_h, which makes the traced transfer
    matrix rank one (zero correlation length); otherwise the traces are
    generic.
    """
    rng = rng_from(seed)
    lsz = [int(rng.integers(1, max_split + 1)) for _ in range(n_labels)]
    rsz = [int(rng.integers(1, max_split + 1)) for _ in range(n_labels)]
    eta = {}
    for k in range(n_labels):
        for h in range(n_labels):
            eta[k, h] = _random_psd(rng, rsz[k] * lsz[h])
    if rank_one:
        a = rng.uniform(0.5, 1.5, size=n_labels)
        b = rng.uniform(0.5, 1.5, size=n_labels)
        for k in range(n_labels):
            for h in range(n_labels):
                eta[k, h] = (a[k] * b[h]) * eta[k, h]
    else:
        # independent positive traces: for two or more labels the trace
        # matrix is generically full rank, breaking zero correlation length
        for k in range(n_labels):
            for h in range(n_labels):
                eta[k, h] = float(rng.uniform(0.5, 1.5)) * eta[k, h]
    d = sum(l * r for l, r in zip(lsz, rsz))
    dims = sum(r * r for r in rsz)
    poff = np.cumsum([0] + [l * r for l, r in zip(lsz, rsz)])
    boff = np.cumsum([0] + [r * r for r in rsz])
    m = np.zeros((d, d, dims, dims), dtype=np.complex128)
    for h in range(n_labels):
        for k in range(n_labels):
            blk = eta[k, h].reshape(rsz[k], lsz[h], rsz[k], lsz[h])
            for x in range(lsz[h]):
                for xp in range(lsz[h]):
                    for y in range(rsz[h]):
                        for yp in range(rsz[h]):
                            i = poff[h] + x * rsz[h] + y
                            j = poff[h] + xp * rsz[h] + yp
                            right = boff[h] + y * rsz[h] + yp
                            for u in range(rsz[k]):
                                for up in range(rsz[k]):
                                    left = boff[k] + u * rsz[k] + up
                                    m[i, j, left, right] = blk[u, x, up, xp]
    return MpdoTensor(m)


def cyclic_characters(n: int) -> list[np.ndarray]:
    """The n diagonal character unitaries of Z_n on an n-dimensional site."""
    w = np.exp(2j * np.pi / n)
    return [np.diag(w ** (a * np.arange(n))) for a in range(n)]


def character_mpdo(
    unitaries: list[np.ndarray],
    gibbs: np.ndarray | None = None,
    rotate: np.ndarray | None = None,
) -> MpdoTensor:
    """MPDO generating rho_N = sum_g (U_g e^{-h})^{xN}.

    ``unitaries`` must be closed under multiplication and adjoint (a unitary
    representation of a finite group), so the ring operators are Hermitian
    and proportional to the projector onto the invariant subspace, times the
    on-site Gibbs factor e^{-h} when ``gibbs`` (= h, commuting with every
    U_g) is given.  ``rotate`` conjugates the physical site by a unitary.
    """
    d = unitaries[0].shape[0]
    g = len(unitaries)
    factor = np.eye(d) if gibbs is None else _matexp(-np.asarray(gibbs))
    m = np.zeros((d, d, g, g), dtype=np.complex128)
    for a, u in enumerate(unitaries):
        m[:, :, a, a] = u @ factor
    if rotate is not None:
        v = np.asarray(rotate)
        m = np.einsum("ip,pqab,jq->ijab", v, m, v.conj())
    return MpdoTensor(m)


def _matexp(h: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh((h + h.conj().T) / 2.0)
    return (vecs * np.exp(vals)) @ vecs.conj().T


def random_rfp_mpdo(seed) -> MpdoTensor:
    """Random block-direct-sum fixed-point MPDO.

    Picks a finite cyclic group Z_n (n <= 3, keeping the boundary-operator
    rings dense-contractable), a diagonal unitary representation with a
    uniform multiplicity m, a random Gibbs factor acting on the
    multiplicity space only (identically in every sector, so the sector
    weights stay idempotent), and a random physical basis rotation.
    """
    rng = rng_from(seed)
    n = int(rng.integers(2, 4))
    m = int(rng.integers(1, 3))
    d = n * m
    # site basis ordered (character sector, multiplicity copy)
    diag = np.repeat(np.arange(n), m)
    w = np.exp(2j * np.pi / n)
    unitaries = [np.diag(w ** (a * diag)) for a in range(n)]
    h = np.diag(np.tile(rng.uniform(-0.7, 0.7, size=m), n))
    v = random_unitary(d, rng)
    return character_mpdo(unitaries, gibbs=h, rotate=v)


def rfp_mpdo_suite(count: int = 20, seed: int = 20260826) -> list[MpdoTensor]:
    """A deterministic batch of constructed fixed-point MPDOs."""
    rng = rng_from(seed)
    return [random_rfp_mpdo(rng) for _ in range(count)]
