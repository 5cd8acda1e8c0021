"""Acceptance gate: the ten headline properties at their stated tolerances.

Each test prints one summary line; heavy artifacts (kernel quadratures at
order 64, the truncation-12 complexes, the 20-probe master equation run)
are shared through module-scoped fixtures.
"""

import time

import numpy as np
import pytest

from twistorbf import bv
from twistorbf.gcomplex import GComplex
from twistorbf.selfdual import check_u_cohomology_iso
from twistorbf.suites import (
    SuiteConfig,
    suite_bv,
    suite_cohomology,
    suite_invariance,
    suite_kernel,
)
from twistorbf.transfer import (
    build_contraction,
    check_cyclic,
    check_linfty_relations,
    harmonic_pairing,
    quasi_iso_linear,
    transfer,
)


def _line(num, label, ok, detail=""):
    print("criterion %2d %-28s %s  %s"
          % (num, label, "PASS" if ok else "FAIL", detail))


def _by_prefix(checks, prefix):
    return [c for c in checks if c["name"].startswith(prefix)]


@pytest.fixture(scope="module")
def kernel_checks():
    return suite_kernel(SuiteConfig(suite="kernel"))


@pytest.fixture(scope="module")
def bv_checks():
    return suite_bv(SuiteConfig(suite="bv"))


def test_criterion_01_serre_dimensions():
    start = time.time()
    checks = suite_cohomology(SuiteConfig(suite="cohomology"))
    elapsed = time.time() - start
    ok = len(checks) == 17 and all(c["pass"] for c in checks)
    ok = ok and elapsed < 5.0
    _line(1, "serre dimensions", ok, "17 twists, %.2fs" % elapsed)
    assert all(c["residual"] == 0.0 for c in checks)
    assert len(checks) == 17
    assert elapsed < 5.0


def test_criterion_02_chain_homotopy(kernel_checks):
    spectral = _by_prefix(kernel_checks, "chain-identity-spectral")
    quad = _by_prefix(kernel_checks, "chain-identity-quadrature")
    ws = max(c["residual"] for c in spectral)
    wq = max(c["residual"] for c in quad)
    ok = len(spectral) == 11 and ws < 1e-10 and wq < 1e-5
    _line(2, "chain homotopy identity", ok,
          "spectral %.1e, quadrature %.1e" % (ws, wq))
    assert len(spectral) == 11 and len(quad) == 11
    assert ws < 1e-10
    assert wq < 1e-5


def test_criterion_03_closed_form_kernel(kernel_checks):
    agree = [c for c in _by_prefix(kernel_checks, "kernel-vs-spectral")
             if -4 <= int(c["name"].rsplit("n", 1)[1]) <= 2]
    blocks = _by_prefix(kernel_checks, "six-block-kernel-assembly")
    worst = max(c["residual"] for c in agree + blocks)
    ok = len(agree) == 7 and len(blocks) == 1 and worst < 1e-5
    _line(3, "closed-form vs spectral", ok, "worst %.1e" % worst)
    assert len(agree) == 7 and len(blocks) == 1
    assert worst < 1e-5
    assert all(c["fitted_sign"] == 1.0 for c in agree)


def test_criterion_04_invariance():
    checks = suite_invariance(SuiteConfig(suite="invariance"))
    random = [c for c in checks if "identity" not in c["name"]]
    ident = [c for c in checks if "identity" in c["name"]]
    worst = max(c["residual"] for c in random)
    ok = (len(random) == 7 and worst < 1e-10
          and all(c["residual"] == 0.0 for c in ident))
    _line(4, "unitary mobius invariance", ok,
          "worst %.1e over 100 samples/twist" % worst)
    assert len(random) == 7 and len(ident) == 7
    assert worst < 1e-10
    assert all(c["residual"] == 0.0 for c in ident)


def test_criterion_05_holomorphy(kernel_checks):
    holo = _by_prefix(kernel_checks, "kernel-holomorphy")
    worst = max(c["residual"] for c in holo)
    ok = len(holo) == 7 and worst < 1e-7
    _line(5, "kernel holomorphy", ok, "worst fd residual %.1e" % worst)
    assert len(holo) == 7
    assert worst < 1e-7


def test_criterion_06_side_conditions():
    g = GComplex(12)
    H, Pr = g.hom_full, g.proj_full
    M = g.pairing_matrix().matrix
    s = np.where(g.space.reduced_degrees() % 2, -1.0, 1.0)
    r_sq = np.abs(H @ H).max()
    r_orth = np.abs(H.T @ M @ Pr).max()
    r_adj = np.abs(H.T @ M - s[:, None] * (M @ H)).max()
    ge = GComplex(12, extended=True)
    HD = ge.hom_full @ ge.d_iota_signed
    r_nil = np.abs(HD @ HD).max()
    worst = max(r_sq, r_orth, r_adj, r_nil)
    _line(6, "contraction side conditions", worst < 1e-12,
          "H2 %.1e, orth %.1e, adj %.1e, (Hd)2 %.1e"
          % (r_sq, r_orth, r_adj, r_nil))
    assert r_sq < 1e-12
    assert r_orth < 1e-12
    assert r_adj < 1e-12
    assert r_nil < 1e-12


def test_criterion_07_hull_cohomology_match():
    rep = check_u_cohomology_iso(truncation=12)
    ok = (rep["o_dims"] == {0: 1, 1: 4, 2: 3}
          and rep["w_dims"] == {1: 3, 2: 4, 3: 1}
          and rep["product_rank"] == 3 and rep["pass"])
    _line(7, "hull vs sheaf cohomology", ok,
          "dims (1,4,3|3,4,1), rank %d, match %.1e"
          % (rep["product_rank"], rep["basis_change_residual"]))
    assert rep["o_dims"] == {0: 1, 1: 4, 2: 3}
    assert rep["w_dims"] == {1: 3, 2: 4, 3: 1}
    assert rep["product_rank"] == 3
    assert rep["pass"]


def test_criterion_08_homotopy_transfer():
    start = time.time()
    g = GComplex(6)
    con = build_contraction(g)
    tb = transfer(con, max_arity=4)
    rng = np.random.default_rng(0)
    lr = check_linfty_relations(tb, rng, max_arity=4, samples=2, rank=2)
    r_rel = max(v for v in lr.values() if v is not None)
    qi = quasi_iso_linear(con)
    cy = check_cyclic(tb, harmonic_pairing(con), rng, arities=(2, 3, 4),
                      samples=5, rank=2)
    r_cy = max(cy.values())
    elapsed = time.time() - start
    ok = (con.nharm == 16 and r_rel < 1e-10
          and qi["cochain_residual"] < 1e-10 and qi["isomorphism"]
          and r_cy < 1e-10 and elapsed < 60.0)
    _line(8, "homotopy transfer", ok,
          "relations %.1e, cochain %.1e, cyclic %.1e, %.1fs"
          % (r_rel, qi["cochain_residual"], r_cy, elapsed))
    assert con.nharm == 16          # 16 k^2 degrees of freedom at k = 2
    assert r_rel < 1e-10
    assert qi["cochain_residual"] < 1e-10
    assert qi["isomorphism"]
    assert r_cy < 1e-10
    assert elapsed < 60.0


def test_criterion_09_master_equation(bv_checks):
    named = {c["name"]: c for c in bv_checks}
    r_me = named["master-equation"]["residual"]
    r_cyc = named["trace-cyclicity"]["residual"]
    ok = r_me < 1e-11 and r_cyc < 1e-12
    _line(9, "classical master equation", ok,
          "{S,S} %.1e over 20 probes, cyclicity %.1e" % (r_me, r_cyc))
    assert r_me < 1e-11
    assert r_cyc < 1e-12


def test_criterion_10_exactness_and_insertion():
    worst_rank = 0
    worst_comp = 0.0
    worst_dd = 0.0
    worst_leib = 0.0
    for trunc in (5, 6, 7, 8, 12):
        gt = GComplex(trunc, extended=True)
        rows = gt.exactness_report()
        worst_rank += sum(1 for r in rows if not r["exact"])
        worst_comp = max(worst_comp,
                         max(r["compose_residual"] for r in rows))
        worst_dd = max(worst_dd,
                       np.abs(gt.d_iota_signed @ gt.d_iota_signed).max())
        rng = np.random.default_rng(trunc)
        x = gt.random_vector(rng, max_level=0)
        y = gt.random_vector(rng, max_level=0)
        s = np.where(gt.space.reduced_degrees() % 2, -1.0, 1.0)
        D = gt.d_iota_signed
        lhs = D @ gt.product_apply(x, y)
        rhs = gt.product_apply(D @ x, y) + gt.product_apply(s * x, D @ y)
        worst_leib = max(worst_leib, np.abs(lhs - rhs).max())
    ok = (worst_rank == 0 and worst_comp < 1e-12 and worst_dd == 0.0
          and worst_leib < 1e-12)
    _line(10, "short sequence exactness", ok,
          "ranks exact, compose %.1e, leibniz %.1e"
          % (worst_comp, worst_leib))
    assert worst_rank == 0
    assert worst_comp < 1e-12
    assert worst_dd == 0.0
    assert worst_leib < 1e-12
