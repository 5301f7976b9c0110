import numpy as np
import pytest

from mpvkit.canonical import to_block_injective
from mpvkit.examples import example
from mpvkit.mpdo import ts_channels_pure
from mpvkit.rfp_pure import (
    decorrelation_check,
    entropy_profile_pure,
    is_cid,
    is_locally_orthogonal,
    is_rfp_pure,
    parent_hamiltonian,
    renormalization_flow,
    rfp_decompose,
)
from mpvkit.sampling import random_cf_tensor, random_rfp_tensor, rng_from
from mpvkit.tensors import mpv_dense

PURE_EXAMPLES = [
    "ghz",
    "product",
    "xx-periodic",
    "two-blocks",
    "aklt",
    "bell-chain",
    "fibonacci-vacuum",
]


def _triangle_members(a, tol=1e-8):
    # all three verdicts refer to the same canonically blocked tensor: the
    # fixed-point test works on the trace-preserving representative, so the
    # distance-independence and orthogonality legs must be evaluated after
    # the same blocking (a 2-periodic tensor blocks to a fixed point even
    # though its site-level correlations alternate with the separation)
    rfp = is_rfp_pure(a, tol=tol)[0]
    bi = to_block_injective(a, tol=tol)
    zcl = is_cid(bi.tensor, n=8, tol=tol)[0] and is_locally_orthogonal(bi.tensor, tol=tol)[0]
    ph = parent_hamiltonian(bi.tensor, L=2, tol=tol, max_dense_dim=2200)
    return rfp, zcl, bool(ph.commuting and ph.parent)


@pytest.mark.parametrize("name", PURE_EXAMPLES)
def test_triangle_built_in(name):
    a = example(name)
    rfp, zcl, parent = _triangle_members(a)
    assert rfp == zcl == parent


def test_triangle_random_cf_corpus():
    rng = rng_from(17)
    for _ in range(100):
        d = int(rng.integers(2, 4))
        D = int(rng.integers(1, 4))
        a = random_cf_tensor(d, D, rng)
        rfp, zcl, parent = _triangle_members(a)
        assert rfp == zcl == parent


def test_constructed_fixed_points_detected():
    rng = rng_from(18)
    for _ in range(20):
        D = int(rng.integers(1, 4))
        a = random_rfp_tensor(D, rng)
        verdict, residual = is_rfp_pure(a)
        assert verdict and residual < 1e-9


def test_rfp_decompose_round_trip():
    rng = rng_from(19)
    for _ in range(10):
        D = int(rng.integers(1, 4))
        a = random_rfp_tensor(D, rng)
        dec = rfp_decompose(a)
        assert dec.isometry_residual < 1e-8
        b = dec.reassemble()
        for n in (2, 3, 4, 5, 6):
            v1, v2 = mpv_dense(a, n), mpv_dense(b, n)
            # same family: compare as normalized states (weights are
            # unimodular, a global phase per ring size may remain)
            overlap = abs(np.vdot(v1, v2)) / max(
                np.linalg.norm(v1) * np.linalg.norm(v2), 1e-300
            )
            assert overlap > 1 - 1e-9


def test_flow_converges_to_fixed_point():
    for name in PURE_EXAMPLES:
        res = renormalization_flow(example(name))
        assert res.converged
        lim = res.limit
        assert np.linalg.norm(lim @ lim - lim) < 1e-9


def test_rfp_implies_entropy_saturation():
    for name in PURE_EXAMPLES:
        a = example(name)
        if not is_rfp_pure(a)[0]:
            continue
        _, sal = entropy_profile_pure(a, n=6)
        assert sal


def test_entropy_profiles():
    s, sal = entropy_profile_pure(example("ghz"), n=6)
    assert np.allclose(s, 1.0, atol=1e-9) and sal
    s, sal = entropy_profile_pure(example("bell-chain"), n=6)
    assert np.allclose(s, 2.0, atol=1e-9) and sal
    s, sal = entropy_profile_pure(example("aklt"), n=8)
    assert not sal
    half = s[: len(s) // 2 + 1]
    assert all(x <= y + 1e-9 for x, y in zip(half, half[1:]))
    assert np.allclose(s, s[::-1], atol=1e-9)


def test_channel_pair_exists_iff_fixed_point():
    for name in PURE_EXAMPLES:
        a = example(name)
        expected = is_rfp_pure(a)[0]
        try:
            ch = ts_channels_pure(a)
            got = bool(ch.identities_ok)
        except (ValueError, ArithmeticError):
            got = False
        assert got == expected, name


def test_decorrelation_ghz_subspace():
    basis = np.zeros((2, 8))
    basis[0, 0] = 1.0
    basis[1, 7] = 1.0
    res = decorrelation_check(basis, (2, 2, 2))
    assert res.decorrelated and res.commuting
    assert res.projector_identity < 1e-9


def test_decorrelation_full_space_trivial():
    res = decorrelation_check(np.eye(8), (2, 2, 2))
    assert res.decorrelated


def test_decorrelation_aklt_fails():
    from mpvkit.tensors import open_chain_vectors

    a = example("aklt")
    vecs = open_chain_vectors(a, 3)
    q, r = np.linalg.qr(vecs.conj().T)
    basis = q[:, np.abs(np.diag(r)) > 1e-10 * np.max(np.abs(np.diag(r)))].conj().T
    res = decorrelation_check(basis, (3, 3, 3))
    assert not res.decorrelated
    assert res.decorrelated == res.commuting


def test_decorrelation_rejects_non_orthonormal():
    with pytest.raises(ValueError):
        decorrelation_check(np.ones((2, 8)), (2, 2, 2))
