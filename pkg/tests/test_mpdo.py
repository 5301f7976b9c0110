import numpy as np
import pytest

from mpvkit.examples import example
from mpvkit.mpdo import (
    build_ts_channels,
    extract_gsnnch,
    is_prfp,
    is_simple,
    is_zcl_mixed,
    mutual_info_profile,
    purify,
    ts_channels_pure,
    validate_mpdo,
)
from mpvkit.sampling import random_eta_mpdo, random_mpdo, rng_from
from mpvkit.tensors import MpdoTensor, mpdo_dense, mpdo_from_pure, mpv_dense


def test_validate_toric_positive():
    v = validate_mpdo(example("toric-boundary"))
    assert v.positive
    assert max(v.hermitian_residuals.values()) < 1e-12


def test_validate_flags_non_hermitian():
    m = np.zeros((2, 2, 1, 1), dtype=complex)
    m[0, 1, 0, 0] = 1.0
    v = validate_mpdo(MpdoTensor(m))
    assert not v.positive
    assert max(v.hermitian_residuals.values()) > 0.1


def test_zcl_toric():
    zcl, scale, _ = is_zcl_mixed(example("toric-boundary"))
    assert zcl and abs(scale - 2.0) < 1e-12


def test_zcl_fails_for_two_scale_traced_map():
    zcl, _, traced = is_zcl_mixed(example("sal-no-zcl"))
    assert not zcl
    evals = np.sort(np.abs(np.linalg.eigvals(traced)))[::-1]
    assert evals[1] > 0.1  # second nonzero scale: finite correlation length


def test_mixture_example_entropy_profile():
    m = example("zcl-no-sal", 0.25)
    prof = mutual_info_profile(m, n=4)
    assert np.allclose(prof.entropies, [2.0, 2.9544, 3.8802], atol=5e-4)
    assert abs(prof.total_entropy - 2.7839) < 5e-4
    assert abs(prof.mutual_info[0] - 3.0963) < 5e-4
    assert abs(prof.mutual_info[1] - 3.1250) < 5e-4
    assert not prof.sal
    assert is_zcl_mixed(m)[0]


def test_separation_saturation_without_zero_length():
    m = example("sal-no-zcl")
    assert mutual_info_profile(m, n=6).sal
    assert not is_zcl_mixed(m)[0]


def test_mutual_info_monotone_and_bounded():
    rng = rng_from(21)
    for _ in range(40):
        d = int(rng.integers(2, 4))
        D = int(rng.integers(1, 4))
        m = random_mpdo(d, D, rng, n_check=6)
        prof = mutual_info_profile(m, n=6)
        for a, b in zip(prof.mutual_info, prof.mutual_info[1:]):
            assert a <= b + 1e-9
        assert all(i <= prof.bound + 1e-9 for i in prof.mutual_info)
        assert prof.bound == pytest.approx(4 * np.log2(D))


def _traced_purification(pur, n):
    """Reduced state of the ring purification with the ancillas traced out."""
    d, anc = pur.system_dim, pur.ancilla_dim
    psi = mpv_dense(pur.tensor, n)
    resh = psi.reshape([d, anc] * n)
    sys_axes = tuple(range(0, 2 * n, 2))
    anc_axes = tuple(range(1, 2 * n, 2))
    mat = resh.transpose(*sys_axes, *anc_axes).reshape(d**n, anc**n)
    return mat @ mat.conj().T


def test_purify_reproduces_normalized_states():
    rng = rng_from(22)
    cases = [example("toric-boundary"), example("max-mixed")]
    cases += [random_eta_mpdo(rng, n_labels=1, rank_one=True) for _ in range(3)]
    for m in cases:
        pur = purify(m)
        assert pur.success
        for n in (3, 4):
            rho = mpdo_dense(m, n)
            red = _traced_purification(pur, n)
            rho_n = rho / np.trace(rho)
            red_n = red / np.trace(red)
            assert np.max(np.abs(rho_n - red_n)) < 1e-9


def test_prfp_max_mixed():
    verdict, pur, witness = is_prfp(example("max-mixed"))
    assert verdict and witness < 1e-9
    assert pur.success


def test_pure_projector_mpdo_is_not_simple():
    m = mpdo_from_pure(example("ghz"))
    assert not is_simple(m).simple


def test_toric_simple_witness():
    res = is_simple(example("toric-boundary"))
    assert not res.simple
    assert res.nilpotent_blocks


def test_channel_pair_pure_cases():
    for name in ("ghz", "product", "xx-periodic", "bell-chain"):
        ch = ts_channels_pure(example(name))
        assert ch.identities_ok and ch.trace_preserving and ch.completely_positive
        assert max(ch.identity_residuals.values()) < 1e-9
    for name in ("aklt", "two-blocks", "fibonacci-vacuum"):
        with pytest.raises((ValueError, ArithmeticError)):
            ts_channels_pure(example(name))


def _succeeds(g) -> bool:
    return bool(g.applicable and g.sal and g.rank_one)


def test_structure_extraction_iff_saturation_and_zero_length():
    rng = rng_from(23)

    def draw(**kw):
        # keep the site dimension small enough for dense six-site checks
        while True:
            m = random_eta_mpdo(rng, **kw)
            if m.d <= 3:
                return m

    corpus = [example("sal-no-zcl"), example("zcl-no-sal", 0.25), example("max-mixed")]
    corpus += [draw(rank_one=True) for _ in range(10)]
    corpus += [
        draw(rank_one=bool(rng.integers(0, 2)), n_labels=int(rng.integers(1, 3)))
        for _ in range(50)
    ]
    for k, m in enumerate(corpus):
        sal = mutual_info_profile(m, n=6).sal
        zcl = bool(is_zcl_mixed(m)[0])
        try:
            g = extract_gsnnch(m)
            success = _succeeds(g)
        except (ValueError, ArithmeticError):
            success = False
        assert success == (sal and zcl), f"member {k}: success={success} sal={sal} zcl={zcl}"
        if success:
            ch = build_ts_channels(g)
            assert ch.identities_ok
            assert max(ch.identity_residuals.values()) < 1e-9
            assert ch.trace_preserving and ch.completely_positive


def test_structure_blocks_positive_and_primitive():
    rng = rng_from(24)
    m = random_eta_mpdo(rng, rank_one=True)
    g = extract_gsnnch(m)
    assert g.applicable and g.rank_one and g.primitive
    for eta in g.eta.values():
        assert np.min(np.linalg.eigvalsh((eta + eta.conj().T) / 2)) > -1e-9


def test_two_scale_structure_still_reported():
    g = extract_gsnnch(example("sal-no-zcl"))
    assert g.applicable and g.sal and not g.rank_one
    t = np.asarray(g.t)
    t = t / t.max()
    assert np.allclose(np.sort(t.reshape(-1)), [0.5, 0.5, 1.0, 1.0], atol=1e-9)
