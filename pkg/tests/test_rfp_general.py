import numpy as np
import pytest

from mpvkit.examples import example
from mpvkit.rfp_general import (
    fibonacci_rank,
    fit_algebra,
    fusion_isometry,
    gauge_rfp_spectral_check,
    is_rfp_mpdo,
    matches_geometric_rank,
    projector_gibbs_decomposition,
    vertical_cf,
)
from mpvkit.sampling import random_rfp_mpdo, rfp_mpdo_suite, rng_from


def test_vertical_cf_toric():
    v = vertical_cf(example("toric-boundary"))
    assert len(v.labels) == 2
    assert v.residual < 1e-10


def test_algebra_toric():
    v = vertical_cf(example("toric-boundary"))
    alg = fit_algebra(v)
    assert alg.verdict
    assert alg.l_independent and alg.integer_coefficients and alg.idempotent_ok
    resid = {k: v for k, v in alg.residuals.items() if k != "idempotent_scale"}
    assert max(resid.values()) < 1e-9
    assert abs(alg.residuals["idempotent_scale"] - 2.0) < 1e-9
    # the two sectors fuse like the order-2 group characters
    g = len(alg.labels)
    assert g == 2
    fused = {}
    for a in range(g):
        for b in range(g):
            res = fusion_isometry(v, a, b)
            assert res.residual < 1e-9
            nonzero = [c for c, x in enumerate(res.chi) if abs(x) > 1e-9]
            fused[(a, b)] = nonzero
    assert fused[(0, 0)] == fused[(1, 1)]
    assert fused[(0, 1)] == fused[(1, 0)]
    assert fused[(0, 0)] != fused[(0, 1)]


def test_is_rfp_toric():
    rep = is_rfp_mpdo(example("toric-boundary"))
    assert rep.rfp
    resid = {k: v for k, v in rep.algebra.residuals.items() if k != "idempotent_scale"}
    assert max(resid.values()) < 1e-9


def test_projector_gibbs_toric():
    dec = projector_gibbs_decomposition(example("toric-boundary"))
    assert dec.ok
    assert len(dec.weights) == 1
    assert abs(dec.weights[0] - 2.0) < 1e-9
    assert np.max(np.abs(dec.h_site)) < 1e-9
    p = dec.projectors[0]
    assert np.max(np.abs(p @ p - p)) < 1e-9


def test_is_rfp_max_mixed():
    assert is_rfp_mpdo(example("max-mixed")).rfp


def test_non_rfp_negatives():
    for m in (example("zcl-no-sal", 0.25), example("sal-no-zcl")):
        rep = is_rfp_mpdo(m)
        assert not rep.rfp


def test_constructed_suite_algebra_predicts_next_length():
    for m in rfp_mpdo_suite(count=20):
        rep = is_rfp_mpdo(m, l_max=5)
        assert rep.rfp, rep.reason
        alg = rep.algebra
        # coefficients fitted from the window extrapolate one length further
        pred = alg.c_from_chi(6)
        direct = fit_algebra(rep.vertical, l_max=6).c[6]
        assert np.max(np.abs(pred - direct)) < 1e-7


def test_projector_gibbs_recovers_constructed_weights():
    rng = rng_from(31)
    for _ in range(5):
        m = random_rfp_mpdo(rng)
        dec = projector_gibbs_decomposition(m)
        assert dec.ok
        assert max(dec.residuals.values()) < 1e-8
        for p in dec.projectors:
            assert np.max(np.abs(p @ p - p)) < 1e-8
        g = dec.site_gibbs
        assert np.max(np.abs(g - g.conj().T)) < 1e-9
        assert np.min(np.linalg.eigvalsh((g + g.conj().T) / 2)) > 1e-9


def test_spectral_check():
    for name in ("ghz", "product", "xx-periodic"):
        assert gauge_rfp_spectral_check(example(name))
    for name in ("aklt", "two-blocks"):
        assert not gauge_rfp_spectral_check(example(name))


def test_fibonacci_ranks():
    got = [fibonacci_rank(n)["closed_form"] for n in (1, 2, 3, 4)]
    assert got == [3, 7, 18, 47]


def test_fibonacci_rank_brute_force_agrees():
    for n in (1, 2, 3):
        rep = fibonacci_rank(n)
        assert rep["brute_force"] == rep["closed_form"]


def test_fibonacci_rank_recurrence():
    # even-index Lucas recurrence: r_n = 3 r_{n-1} - r_{n-2}
    r = {n: fibonacci_rank(n, brute_cap=0)["closed_form"] for n in range(1, 9)}
    for n in range(3, 9):
        assert r[n] == 3 * r[n - 1] - r[n - 2]


def test_no_geometric_rank_fit():
    ranks = [fibonacci_rank(n)["closed_form"] for n in (1, 2, 3, 4)]
    assert not matches_geometric_rank(ranks, max_base=50)
    assert matches_geometric_rank([2 * 3**n for n in range(4)], max_base=50)
