"""Acceptance gate: one test per shipped criterion, each printing a
single PASS line with the measured figures when it holds.  Every check
uses the stated tolerance and wall-clock budget."""

import time

import numpy as np

from mpvkit.canonical import (
    canonical_form,
    find_gauge,
    fundamental_theorem_check,
    to_block_injective,
)
from mpvkit.examples import example
from mpvkit.mpdo import (
    build_ts_channels,
    extract_gsnnch,
    is_simple,
    is_zcl_mixed,
    mutual_info_profile,
)
from mpvkit.rfp_general import (
    fibonacci_rank,
    fit_algebra,
    fusion_isometry,
    is_rfp_mpdo,
    matches_geometric_rank,
    projector_gibbs_decomposition,
)
from mpvkit.rfp_pure import (
    is_cid,
    is_locally_orthogonal,
    is_rfp_pure,
    parent_hamiltonian,
)
from mpvkit.sampling import (
    random_eta_mpdo,
    random_cf_tensor,
    random_gauge,
    random_mpdo,
    random_normal_tensor,
    rfp_mpdo_suite,
    rng_from,
)
from mpvkit.tensors import MpvTensor, direct_sum_tensors

PURE_EXAMPLES = [
    "ghz",
    "product",
    "xx-periodic",
    "two-blocks",
    "aklt",
    "bell-chain",
    "fibonacci-vacuum",
]


def test_criterion_1_mixture_entropy_profile():
    start = time.perf_counter()
    prof = mutual_info_profile(example("zcl-no-sal", 0.25), n=4)
    entropies = list(prof.entropies) + [prof.total_entropy]
    expect = [2.0, 2.9544, 3.8802, 2.7839]
    assert np.allclose(entropies, expect, atol=5e-4)
    assert abs(prof.mutual_info[0] - 3.0963) < 5e-4
    assert abs(prof.mutual_info[1] - 3.1250) < 5e-4
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0
    print(
        f"PASS criterion-1: S profile {np.round(entropies, 4).tolist()}, "
        f"I=({prof.mutual_info[0]:.4f}, {prof.mutual_info[1]:.4f}) in {elapsed:.2f}s"
    )


def test_criterion_2_fibonacci_ranks():
    start = time.perf_counter()
    reports = [fibonacci_rank(n) for n in (1, 2, 3, 4)]
    ranks = [r["closed_form"] for r in reports]
    assert ranks == [3, 7, 18, 47]
    for r in reports[:3]:
        assert r["brute_force"] == r["closed_form"]
    assert not matches_geometric_rank(ranks, max_base=50)
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    print(f"PASS criterion-2: ranks {ranks}, no r*s^(N-1) fit (r,s<=50), {elapsed:.2f}s")


def test_criterion_3_toric_boundary():
    start = time.perf_counter()
    m = example("toric-boundary")
    zcl, scale, _ = is_zcl_mixed(m)
    assert zcl
    prof = mutual_info_profile(m, n=6)
    assert prof.sal
    assert all(abs(i - 1.0) < 1e-9 for i in prof.mutual_info)
    simple = is_simple(m)
    assert not simple.simple and simple.nilpotent_blocks
    rep = is_rfp_mpdo(m)
    assert rep.rfp
    for value in rep.algebra.chi.values():
        for x in np.atleast_1d(value):
            assert min(abs(x), abs(x - 1.0)) < 1e-9
    dec = projector_gibbs_decomposition(m)
    assert dec.ok
    assert len(dec.weights) == 1 and abs(dec.weights[0] - 2.0) < 1e-9
    assert np.max(np.abs(dec.h_site)) < 1e-9
    p = dec.projectors[0]
    assert np.max(np.abs(p @ p - p)) < 1e-9
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    print(
        f"PASS criterion-3: zcl, sal (I_L=1 at N=6), non-simple witness, "
        f"binary fusion, rho=2P with H=0, {elapsed:.2f}s"
    )


def _triangle(a, tol=1e-8):
    rfp = is_rfp_pure(a, tol=tol)[0]
    bi = to_block_injective(a, tol=tol)
    zcl = (
        is_cid(bi.tensor, n=8, tol=tol)[0]
        and is_locally_orthogonal(bi.tensor, tol=tol)[0]
    )
    ph = parent_hamiltonian(bi.tensor, L=2, tol=tol, max_dense_dim=2200)
    return rfp, zcl, bool(ph.commuting and ph.parent)


def test_criterion_4_fixed_point_triangle():
    start = time.perf_counter()
    corpus = [example(name) for name in PURE_EXAMPLES]
    rng = rng_from(17)
    for _ in range(100):
        d = int(rng.integers(2, 4))
        D = int(rng.integers(1, 4))
        corpus.append(random_cf_tensor(d, D, rng))
    violations = 0
    for a in corpus:
        rfp, zcl, parent = _triangle(a)
        if not rfp == zcl == parent:
            violations += 1
    assert violations == 0
    elapsed = time.perf_counter() - start
    assert elapsed < 600.0
    print(
        f"PASS criterion-4: three-way equivalence on {len(corpus)} tensors, "
        f"0 violations, {elapsed:.1f}s"
    )


def test_criterion_5_gauge_round_trips():
    start = time.perf_counter()
    rng = rng_from(11)
    failures = 0
    for _ in range(200):
        d = int(rng.integers(2, 4))
        D = int(rng.integers(1, 4))
        a = random_normal_tensor(d, D, rng)
        x = random_gauge(D, rng)
        phi = float(rng.uniform(0, 2 * np.pi))
        b = MpvTensor(
            np.exp(1j * phi)
            * np.einsum("ab,ibc,cd->iad", x, a.entries, np.linalg.inv(x))
        )
        res = find_gauge(a, b)
        ok = res.found and res.residual < 1e-8
        if ok:
            dphi = (res.phase - phi + np.pi) % (2 * np.pi) - np.pi
            scale = np.trace(x.conj().T @ res.x) / np.trace(x.conj().T @ x)
            ok = (
                abs(dphi) < 1e-8
                and np.max(np.abs(res.x - scale * x))
                < 1e-8 * np.max(np.abs(res.x))
            )
        failures += not ok
    assert failures == 0
    # block-permuted direct sums generate the same family
    a = random_normal_tensor(3, 2, rng)
    b = random_normal_tensor(3, 2, rng)
    s1 = direct_sum_tensors([a, b])
    s2 = direct_sum_tensors([b, a])
    assert fundamental_theorem_check(s1, s2).verdict == "equal"
    elapsed = time.perf_counter() - start
    print(f"PASS criterion-5: 200/200 gauge round trips, permuted sums matched, {elapsed:.1f}s")


def test_criterion_6_structure_extraction_chain():
    start = time.perf_counter()
    rng = rng_from(23)

    def draw(**kw):
        while True:
            m = random_eta_mpdo(rng, **kw)
            if m.d <= 3:
                return m

    corpus = [
        example("sal-no-zcl"),
        example("zcl-no-sal", 0.25),
        example("max-mixed"),
    ]
    corpus += [draw(rank_one=True) for _ in range(10)]
    corpus += [
        draw(rank_one=bool(rng.integers(0, 2)), n_labels=int(rng.integers(1, 3)))
        for _ in range(50)
    ]
    zcl_checked = 0
    for m in corpus:
        sal = mutual_info_profile(m, n=6).sal
        zcl = bool(is_zcl_mixed(m)[0])
        try:
            g = extract_gsnnch(m)
            success = bool(g.applicable and g.sal and g.rank_one)
        except (ValueError, ArithmeticError):
            success = False
            g = None
        assert success == (sal and zcl)
        if success:
            ch = build_ts_channels(g)
            assert ch.identities_ok
            assert max(ch.identity_residuals.values()) < 1e-9
            zcl_checked += 1
    # the two separations: saturation without zero length and vice versa
    sep1 = example("zcl-no-sal", 0.25)
    assert is_zcl_mixed(sep1)[0] and not mutual_info_profile(sep1, n=4).sal
    sep2 = example("sal-no-zcl")
    assert mutual_info_profile(sep2, n=6).sal and not is_zcl_mixed(sep2)[0]
    elapsed = time.perf_counter() - start
    print(
        f"PASS criterion-6: extraction iff SAL&ZCL on {len(corpus)} members, "
        f"channel identities on {zcl_checked} members, separations held, {elapsed:.1f}s"
    )


def test_criterion_7_mutual_info_monotone_bounded():
    start = time.perf_counter()
    rng = rng_from(21)
    violations = 0
    for _ in range(200):
        d = int(rng.integers(2, 4))
        D = int(rng.integers(1, 4))
        m = random_mpdo(d, D, rng, n_check=6)
        prof = mutual_info_profile(m, n=6)
        for a, b in zip(prof.mutual_info, prof.mutual_info[1:]):
            violations += not (a <= b + 1e-9)
        bound = 4 * np.log2(max(D, 1))
        violations += sum(not (i <= bound + 1e-9) for i in prof.mutual_info)
    assert violations == 0
    elapsed = time.perf_counter() - start
    print(f"PASS criterion-7: 200 states, 0 violations, {elapsed:.1f}s")


def test_criterion_8_algebra_fit_self_consistency():
    start = time.perf_counter()
    members = [example("toric-boundary")] + list(rfp_mpdo_suite(count=20))
    for m in members:
        rep = is_rfp_mpdo(m, l_max=5)
        assert rep.rfp, rep.reason
        alg = rep.algebra
        pred = alg.c_from_chi(6)
        direct = fit_algebra(rep.vertical, l_max=6).c[6]
        assert np.max(np.abs(pred - direct)) < 1e-7
        s = alg.gauge if alg.gauge is not None else np.ones(len(alg.labels))
        g = len(alg.labels)
        for a in range(g):
            for b in range(g):
                res = fusion_isometry(rep.vertical, a, b)
                assert res.residual < 1e-7
                for c in range(g):
                    mine = np.sort(
                        np.asarray(res.chi.get(c, np.zeros(0))) * (s[a] * s[b] / s[c])
                    )
                    ref = np.sort(np.asarray(alg.chi[(a, b, c)]))
                    assert mine.shape == ref.shape
                    if ref.size:
                        assert np.max(np.abs(mine - ref)) < 1e-7
    elapsed = time.perf_counter() - start
    print(
        f"PASS criterion-8: window fit predicts next length and fusion weights "
        f"on {len(members)} fixed points, {elapsed:.1f}s"
    )
