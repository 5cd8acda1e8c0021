"""Verification suites behind the command line driver.

Each suite assembles a list of check records {name, anchor, residual,
threshold, pass}.  Anchors are stable slugs naming the verified statement,
so reports can be audited and diffed across runs.  Integer identities
(dimension counts, ranks) are reported as mismatch counts with an `exact`
marker; a tolerance override from the command line leaves those alone.

Per-suite defaults follow the modules: spectral truncation 12, quadrature
order 64, transfer and field-theory checks at truncation 6, matrix rank 2.
A config field left at None means "use the suite default".
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import bv
from .gcomplex import GComplex
from .kernels import (
    G_KERNEL_MULTIPLICITY,
    G_KERNEL_TWISTS,
    KernelHomotopy,
    Mobius,
    chain_identity_quadrature,
    check_holomorphy,
    check_invariance,
    operator_agreement,
    separated_pairs,
)
from .selfdual import check_u_cohomology_iso
from .sphere import build_model
from .transfer import (
    build_contraction,
    check_cyclic,
    check_linfty_relations,
    harmonic_pairing,
    quasi_iso_linear,
    transfer,
)

SUITE_NAMES = ("cohomology", "kernel", "invariance", "htt", "bv", "all")


class SuiteConfig:
    """Flat bundle of driver options; None fields take suite defaults."""

    def __init__(self, suite="all", truncation=None, quadrature=None,
                 tol=None, seed=0, n_range=None, rank=2, max_arity=4,
                 parallel=False):
        self.suite = suite
        self.truncation = truncation
        self.quadrature = quadrature
        self.tol = tol
        self.seed = seed
        self.n_range = n_range
        self.rank = rank
        self.max_arity = max_arity
        self.parallel = parallel

    def validate(self):
        if self.suite not in SUITE_NAMES:
            raise ValueError("unknown suite %r" % (self.suite,))
        for name in ("truncation", "quadrature", "rank", "max_arity"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError("%s must be positive" % name)
        if self.tol is not None and self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.n_range is not None:
            lo, hi = self.n_range
            if lo > hi:
                raise ValueError("empty n-range %d..%d" % (lo, hi))

    def trunc(self, default):
        return default if self.truncation is None else self.truncation

    def order(self):
        return 64 if self.quadrature is None else self.quadrature

    def ns(self, lo, hi):
        if self.n_range is None:
            return list(range(lo, hi + 1))
        return list(range(self.n_range[0], self.n_range[1] + 1))

    def echo(self):
        return {
            "suite": self.suite,
            "truncation": self.truncation,
            "quadrature": self.quadrature,
            "tol": self.tol,
            "seed": self.seed,
            "n_range": list(self.n_range) if self.n_range else None,
            "rank": self.rank,
            "max_arity": self.max_arity,
            "parallel": self.parallel,
        }


def _check(name, anchor, residual, threshold, exact=False, **extra):
    residual = float(residual)
    out = {
        "name": name,
        "anchor": anchor,
        "residual": residual,
        "threshold": float(threshold),
        "pass": bool(residual <= threshold if exact else residual < threshold),
    }
    if exact:
        out["exact"] = True
    out.update(extra)
    return out


def _map_ordered(fn, items, parallel):
    if parallel:
        with ThreadPoolExecutor() as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def _chain_residual_on_sections(m, rng, samples):
    """Worst relative chain-identity residual over random total vectors."""
    d = m.dbar_total.matrix
    h = m.homotopy_total.matrix
    lhs = d @ h + h @ d - (np.eye(d.shape[0]) - m.projector_total.matrix)
    worst = 0.0
    for _ in range(samples):
        v = rng.standard_normal(d.shape[0]) \
            + 1j * rng.standard_normal(d.shape[0])
        worst = max(worst, float(np.abs(lhs @ v).max()
                                 / max(np.abs(v).max(), 1e-30)))
    return worst


def suite_cohomology(cfg):
    def one(n):
        levels = max(cfg.trunc(12), abs(n) + 4)
        h0, h1 = build_model(n, levels).serre_dims()
        miss = abs(h0 - max(n + 1, 0)) + abs(h1 - max(-n - 1, 0))
        return _check("serre-dims-n%+d" % n, "line-bundle-cohomology",
                      miss, 0.0, exact=True, dims=[int(h0), int(h1)])

    return _map_ordered(one, cfg.ns(-8, 8), cfg.parallel)


def suite_kernel(cfg):
    order = cfg.order()
    ns = cfg.ns(-6, 4)

    def one(n):
        rng = np.random.default_rng(cfg.seed + 1000 + n)
        m = build_model(n, max(abs(n) + 4, 8))
        out = [_check("chain-identity-spectral-n%+d" % n,
                      "homotopy-chain-identity",
                      _chain_residual_on_sections(m, rng, 50), 1e-10)]
        hq = KernelHomotopy(m, order=order)
        err, sign = operator_agreement(m, hq, 5)
        out.append(_check("kernel-vs-spectral-n%+d" % n,
                          "closed-form-kernel-agreement", err, 1e-5,
                          fitted_sign=sign))
        out.append(_check("chain-identity-quadrature-n%+d" % n,
                          "homotopy-chain-identity",
                          chain_identity_quadrature(m, hq, rng, 50),
                          1e-5))
        if -4 <= n <= 2:
            worst = 0.0
            # keep pairs off the antipodal locus too: the finite
            # difference stencil loses accuracy where the kernel factor
            # degenerates, not the holomorphy itself
            for z1, z2 in separated_pairs(rng, 20, min_chordal=0.45,
                                          max_chordal=0.9):
                worst = max(worst, float(check_holomorphy(n, z1, z2,
                                                          step=1e-4)))
            out.append(_check("kernel-holomorphy-n%+d" % n,
                              "kernel-holomorphic-argument", worst, 1e-7))
            worst = 0.0
            for z1, z2 in separated_pairs(rng, 20):
                g = Mobius.random(rng)
                worst = max(worst, float(check_invariance(n, g, z1, z2)))
            out.append(_check("kernel-invariance-n%+d" % n,
                              "mobius-transformation-law", worst, 1e-10))
        return out, (n, out[1]["residual"])

    results = _map_ordered(one, ns, cfg.parallel)
    checks = [c for out, _ in results for c in out]
    agreements = {n: r for _, (n, r) in results}
    if all(t in agreements for t in G_KERNEL_TWISTS):
        worst = max(agreements[t] for t in G_KERNEL_TWISTS)
        checks.append(_check(
            "six-block-kernel-assembly", "closed-form-kernel-agreement",
            worst, 1e-5,
            twists=list(G_KERNEL_TWISTS),
            multiplicities=[G_KERNEL_MULTIPLICITY[t]
                            for t in G_KERNEL_TWISTS]))
    return checks


def suite_invariance(cfg):
    def one(n):
        rng = np.random.default_rng(cfg.seed + 2000 + n)
        worst = 0.0
        for z1, z2 in separated_pairs(rng, 100):
            g = Mobius.random(rng)
            worst = max(worst, float(check_invariance(n, g, z1, z2)))
        ident = float(check_invariance(n, Mobius.identity(),
                                       0.4 + 0.1j, -0.3 + 0.9j))
        return [
            _check("kernel-invariance-n%+d" % n,
                   "mobius-transformation-law", worst, 1e-10),
            _check("kernel-invariance-identity-n%+d" % n,
                   "mobius-transformation-law", ident, 0.0, exact=True),
        ]

    return [c for out in _map_ordered(one, cfg.ns(-4, 2), cfg.parallel)
            for c in out]


def suite_htt(cfg):
    checks = []
    L = cfg.trunc(12)

    g = GComplex(L)
    H, Pr = g.hom_full, g.proj_full
    M = g.pairing_matrix().matrix
    sgn = np.where(g.space.reduced_degrees() % 2, -1.0, 1.0)
    checks.append(_check("homotopy-squares-to-zero",
                         "contraction-side-conditions",
                         np.abs(H @ H).max(), 1e-12))
    checks.append(_check("homotopy-orthogonal-to-harmonics",
                         "contraction-side-conditions",
                         np.abs(H.T @ M @ Pr).max(), 1e-12))
    checks.append(_check("homotopy-pairing-adjointness",
                         "contraction-side-conditions",
                         np.abs(H.T @ M - (sgn[:, None] * M) @ H).max(),
                         1e-12))
    ge = GComplex(L, extended=True)
    HD = ge.hom_full @ ge.d_iota_signed
    checks.append(_check("insertion-homotopy-nilpotent",
                         "contraction-side-conditions",
                         np.abs(HD @ HD).max(), 1e-12))

    for trunc in range(5, min(L, 8) + 1):
        gt = GComplex(trunc, extended=True)
        rows = gt.exactness_report()
        bad = sum(1 for r in rows if not r["exact"])
        comp = max(r["compose_residual"] for r in rows)
        checks.append(_check("short-sequence-ranks-L%d" % trunc,
                             "ideal-quotient-exactness", bad, 0.0,
                             exact=True))
        checks.append(_check("short-sequence-composition-L%d" % trunc,
                             "ideal-quotient-exactness", comp, 1e-12))
        dd = gt.d_iota_signed @ gt.d_iota_signed
        checks.append(_check("insertion-squares-to-zero-L%d" % trunc,
                             "insertion-differential", np.abs(dd).max(),
                             1e-12))
        rng_t = np.random.default_rng(cfg.seed + 4000 + trunc)
        x = gt.random_vector(rng_t, max_level=0)
        y = gt.random_vector(rng_t, max_level=0)
        s = np.where(gt.space.reduced_degrees() % 2, -1.0, 1.0)
        D = gt.d_iota_signed
        lhs = D @ gt.product_apply(x, y)
        rhs = gt.product_apply(D @ x, y) + gt.product_apply(s * x, D @ y)
        checks.append(_check("insertion-leibniz-L%d" % trunc,
                             "insertion-differential",
                             np.abs(lhs - rhs).max(), 1e-12))

    rep = check_u_cohomology_iso(truncation=L)
    dims_ok = (rep["o_dims"] == {0: 1, 1: 4, 2: 3}
               and rep["w_dims"] == {1: 3, 2: 4, 3: 1})
    checks.append(_check("hull-graded-dimensions", "cyclic-hull-cohomology",
                         0 if dims_ok else 1, 0.0, exact=True,
                         o_dims=rep["o_dims"], w_dims=rep["w_dims"]))
    checks.append(_check("hull-product-rank", "cyclic-hull-cohomology",
                         abs(rep["product_rank"] - 3), 0.0, exact=True))
    checks.append(_check("hull-product-match", "cyclic-hull-cohomology",
                         rep["basis_change_residual"], 1e-9))

    g6 = GComplex(min(L, 6))
    con = build_contraction(g6)
    tb = transfer(con, max_arity=cfg.max_arity)
    rng = np.random.default_rng(cfg.seed + 3000)
    lr = check_linfty_relations(tb, rng, max_arity=cfg.max_arity,
                                samples=2, rank=cfg.rank)
    checks.append(_check("transfer-jacobi-relations",
                         "homotopy-transfer-relations",
                         max(v for v in lr.values() if v is not None),
                         1e-10, per_arity={str(k): v
                                           for k, v in lr.items()}))
    qi = quasi_iso_linear(con)
    checks.append(_check("transfer-cochain-map", "quasi-isomorphism",
                         qi["cochain_residual"], 1e-10))
    checks.append(_check("transfer-cohomology-iso", "quasi-isomorphism",
                         0 if qi["isomorphism"] else 1, 0.0, exact=True,
                         induced_rank=qi["induced_rank"]))
    P = harmonic_pairing(con)
    cy = check_cyclic(tb, P, rng, arities=(2, 3, 4), samples=3,
                      rank=cfg.rank)
    checks.append(_check("transfer-cyclic-compatibility",
                         "cyclic-pairing-compatibility",
                         max(cy.values()), 1e-10))
    return checks


def suite_bv(cfg):
    g = GComplex(cfg.trunc(6))
    data = bv.BFData(g, rank=cfg.rank)
    out = bv.master_equation_residual(data, probes=20, seed=cfg.seed,
                                      check_variation=2)
    fits = max(max(abs(k - 1.0), m) for k, m in out["eom_fits"])
    return [
        _check("master-equation", "classical-master-equation",
               out["residual"], 1e-11),
        _check("action-variation", "field-equation-pairing",
               out["variation_residual"], 1e-10),
        _check("variation-normalization", "field-equation-pairing",
               fits, 1e-10),
        _check("trace-cyclicity", "graded-trace-cyclicity",
               bv.trace_cyclicity_residual(data, samples=20, seed=cfg.seed),
               1e-12),
    ]


_SUITES = {
    "cohomology": suite_cohomology,
    "kernel": suite_kernel,
    "invariance": suite_invariance,
    "htt": suite_htt,
    "bv": suite_bv,
}


def run_suite(cfg):
    """Run the configured suite(s) and return the report dictionary."""
    cfg.validate()
    names = list(_SUITES) if cfg.suite == "all" else [cfg.suite]
    checks = []
    for name in names:
        checks.extend(_SUITES[name](cfg))
    if cfg.tol is not None:
        for c in checks:
            if not c.get("exact"):
                c["threshold"] = float(cfg.tol)
                c["pass"] = bool(c["residual"] < cfg.tol)
    return {
        "schema": 1,
        "suite": cfg.suite,
        "config": cfg.echo(),
        "checks": checks,
        "pass": all(c["pass"] for c in checks),
    }
