import numpy as np
import pytest

from mpvkit.canonical import (
    canonical_form,
    find_gauge,
    fundamental_theorem_check,
    is_injective,
    is_normal,
    to_block_injective,
    to_cfii,
)
from mpvkit.examples import example
from mpvkit.sampling import (
    random_gauge,
    random_normal_tensor,
    random_tensor,
    rng_from,
)
from mpvkit.tensors import MpvTensor, TransferMap, direct_sum_tensors, mpv_dense


def _conjugate(a: MpvTensor, x: np.ndarray, phase: float = 0.0) -> MpvTensor:
    return MpvTensor(
        np.exp(1j * phase) * np.einsum("ab,ibc,cd->iad", x, a.entries, np.linalg.inv(x))
    )


def test_ghz_not_normal_two_blocks():
    g = example("ghz")
    assert not is_normal(g).normal
    dec = canonical_form(g)
    assert len(dec.blocks) == 2
    assert len(dec.bnt) == 2


def test_aklt_normal_and_injective():
    a = example("aklt")
    assert is_normal(a).normal
    rep = is_injective(a)
    assert rep.injective and rep.length == 2


def test_find_gauge_round_trip_seeded():
    rng = rng_from(11)
    failures = 0
    for _ in range(200):
        d = int(rng.integers(2, 4))
        D = int(rng.integers(1, 4))
        a = random_normal_tensor(d, D, rng)
        x = random_gauge(D, rng)
        phi = float(rng.uniform(0, 2 * np.pi))
        b = _conjugate(a, x, phi)
        res = find_gauge(a, b)
        if not res.found or res.residual > 1e-8:
            failures += 1
            continue
        dphi = (res.phase - phi + np.pi) % (2 * np.pi) - np.pi
        if abs(dphi) > 1e-8:
            failures += 1
            continue
        # x recovered up to a scalar
        scale = np.trace(x.conj().T @ res.x) / np.trace(x.conj().T @ x)
        if np.max(np.abs(res.x - scale * x)) > 1e-8 * np.max(np.abs(res.x)):
            failures += 1
    assert failures == 0


def test_find_gauge_distinct_tensors():
    rng = rng_from(12)
    a = random_normal_tensor(2, 2, rng)
    b = random_normal_tensor(2, 2, rng)
    assert not find_gauge(a, b).found


def test_canonical_round_trip_block_constructions():
    rng = rng_from(13)
    for _ in range(200):
        d = int(rng.integers(2, 5))
        nblocks = int(rng.integers(1, 3))
        blocks = []
        for _ in range(nblocks):
            D = int(rng.integers(1, 3))
            a = random_normal_tensor(d, D, rng)
            x = random_gauge(D, rng)
            w = float(rng.uniform(0.4, 1.0)) * np.exp(1j * float(rng.uniform(0, 2 * np.pi)))
            blocks.append(MpvTensor(w * _conjugate(a, x).entries))
        tot = direct_sum_tensors(blocks)
        dec = canonical_form(tot)
        assert len(dec.blocks) == nblocks
        verdict = fundamental_theorem_check(tot, dec.reassemble())
        assert verdict.verdict == "equal"


def test_block_permutation_matched():
    rng = rng_from(14)
    a = random_normal_tensor(3, 2, rng)
    b = random_normal_tensor(3, 2, rng)
    s1 = direct_sum_tensors([a, b])
    s2 = direct_sum_tensors([b, a])
    assert fundamental_theorem_check(s1, s2).verdict == "equal"


def test_cfii_trace_preserving_blocks():
    rng = rng_from(15)
    a = random_tensor(3, 3, rng)
    a2, lams, dec = to_cfii(a)
    # each block of the CFII tensor is weight * (trace-preserving normal
    # tensor): identity left fixed point, diagonal positive right fixed point
    off = 0
    for entry, lam in zip(dec.blocks, lams):
        k = dec.bnt[entry.bnt_index].D
        sub = MpvTensor(a2.entries[:, off : off + k, off : off + k] / entry.weight)
        e = TransferMap(sub).matrix
        eye = np.eye(k).reshape(-1)
        assert np.max(np.abs(e.conj().T @ eye - eye)) < 1e-8
        lam_mat = np.diag(lam) if np.ndim(lam) == 1 else np.asarray(lam)
        assert np.min(np.diag(lam_mat).real) > 0
        assert np.max(np.abs(e @ lam_mat.reshape(-1) - lam_mat.reshape(-1))) < 1e-8
        off += k


def test_cfii_generates_same_family():
    rng = rng_from(16)
    a = random_tensor(2, 3, rng)
    a2, _, _ = to_cfii(a)
    for n in (3, 4, 5):
        v1, v2 = mpv_dense(a, n), mpv_dense(a2, n)
        assert np.max(np.abs(v1 - v2)) < 1e-8 * max(1.0, np.max(np.abs(v1)))


def test_block_injective_reaches_full_algebra():
    g = example("ghz")
    res = to_block_injective(g)
    assert res.rank == res.target_rank


def test_gauge_requires_normal_input():
    g = example("ghz")
    res = find_gauge(g, g)
    assert not res.found
