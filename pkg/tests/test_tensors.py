import numpy as np
import pytest

from mpvkit.kernels import merge_ring_traces_numpy
from mpvkit.sampling import random_tensor, rng_from
from mpvkit.tensors import (
    MpdoTensor,
    MpvTensor,
    TransferMap,
    direct_sum_tensors,
    mpdo_dense,
    mpdo_from_pure,
    mpv_dense,
    open_chain,
    open_chain_vectors,
    reduced_density,
    von_neumann_entropy,
)


def test_mpv_dense_ghz():
    a = MpvTensor(np.stack([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]))
    v = mpv_dense(a, 3)
    expect = np.zeros(8)
    expect[0] = expect[7] = 1.0
    assert np.allclose(v, expect)


def test_norm_equals_transfer_trace():
    rng = rng_from(20260826)
    for _ in range(100):
        d = int(rng.integers(1, 4))
        D = int(rng.integers(1, 4))
        n = int(rng.integers(2, 9))
        a = random_tensor(d, D, rng)
        v = mpv_dense(a, n)
        lhs = float(np.vdot(v, v).real)
        rhs = float(np.trace(np.linalg.matrix_power(TransferMap(a).matrix, n)).real)
        assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), abs(rhs), 1.0)


def test_open_chain_composition():
    rng = rng_from(3)
    a = random_tensor(2, 3, rng)
    c2 = open_chain(a, 2)
    direct = np.einsum("iab,jbc->ijac", a.entries, a.entries).reshape(4, 3, 3)
    assert np.allclose(c2, direct)
    assert open_chain_vectors(a, 2).shape == (9, 4)


def test_vertical_view_round_trip():
    rng = rng_from(5)
    g = rng.standard_normal((2, 2, 3, 3)) + 1j * rng.standard_normal((2, 2, 3, 3))
    m = MpdoTensor(g)
    v = m.vertical_view()
    assert v.entries.shape == (9, 2, 2)
    assert np.allclose(MpdoTensor.from_vertical_view(v).entries, m.entries)


def test_vertical_product_contracts_virtual_legs():
    rng = rng_from(6)
    g1 = rng.standard_normal((2, 2, 2, 2)) + 0j
    g2 = rng.standard_normal((2, 2, 2, 2)) + 0j
    prod = MpdoTensor(g1).vertical_product(MpdoTensor(g2))
    direct = np.einsum("imab,mjcd->ijacbd", g1, g2).reshape(2, 2, 4, 4)
    assert np.allclose(prod.entries, direct)


def test_mpdo_dense_matches_pure_projector():
    rng = rng_from(7)
    a = random_tensor(2, 2, rng)
    m = mpdo_from_pure(a)
    for n in (2, 3, 4):
        v = mpv_dense(a, n)
        assert np.allclose(mpdo_dense(m, n), np.outer(v, v.conj()), atol=1e-12)


def test_direct_sum_block_structure():
    a = MpvTensor(np.ones((2, 1, 1)))
    b = MpvTensor(2.0 * np.ones((2, 1, 1)))
    s = direct_sum_tensors([a, b])
    assert s.D == 2
    assert np.allclose(s.entries[:, 0, 1], 0.0)
    assert np.allclose(s.entries[:, 1, 0], 0.0)


def test_reduced_density_and_entropy_bell():
    bell = np.zeros(4)
    bell[0] = bell[3] = 1 / np.sqrt(2)
    rho = reduced_density(bell, 2, 2, 1)
    assert np.allclose(rho, np.eye(2) / 2)
    assert abs(von_neumann_entropy(rho) - 1.0) < 1e-12


def test_merge_ring_traces_numpy_matches_direct():
    rng = rng_from(9)
    t1 = rng.standard_normal((5, 3, 3)) + 1j * rng.standard_normal((5, 3, 3))
    t2 = rng.standard_normal((7, 3, 3)) + 1j * rng.standard_normal((7, 3, 3))
    out = merge_ring_traces_numpy(t1, t2)
    direct = np.array([[np.trace(x @ y) for y in t2] for x in t1])
    assert np.allclose(out, direct)


def test_merge_ring_traces_numba_matches_numpy():
    numba = pytest.importorskip("numba")  # noqa: F841
    from mpvkit.kernels import _build_numba_merge

    rng = rng_from(10)
    t1 = rng.standard_normal((4, 2, 2)) + 1j * rng.standard_normal((4, 2, 2))
    t2 = rng.standard_normal((4, 2, 2)) + 1j * rng.standard_normal((4, 2, 2))
    assert np.allclose(_build_numba_merge()(t1, t2), merge_ring_traces_numpy(t1, t2))


def test_shape_validation():
    with pytest.raises(ValueError):
        MpvTensor(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        MpdoTensor(np.zeros((2, 3, 2, 2)))
