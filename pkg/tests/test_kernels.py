import math

import numpy as np
import pytest

from twistorbf.kernels import (
    KernelHomotopy,
    Mobius,
    chain_identity_quadrature,
    check_holomorphy,
    check_invariance,
    check_offdiag_dbar,
    chordal,
    kernel_h,
    kernel_hG,
    operator_agreement,
    reduction_residual,
    separated_pairs,
)
from twistorbf.sphere import build_model


def test_regression_value():
    # independent hand evaluation of the n = -4 branch at (1, 2i)
    got = kernel_h(-4, 1.0, 2.0j)
    assert got == pytest.approx(0.005092958178940651 - 0.0038197186342054886j, abs=1e-17)


def test_branches_agree_at_minus_one():
    rng = np.random.default_rng(1)
    for _ in range(20):
        z1, z2 = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v = kernel_h(-1, z1, z2)
        want = 1.0 / (2j * math.pi * (z2 - z1))
        assert abs(v - want) < 1e-14 * abs(want)


def test_pole_residue_structure():
    # (z2 - z1) h -> 1/(2 pi i) on the diagonal for every twist
    rng = np.random.default_rng(2)
    for n in (-4, -2, -1, 0, 1, 2):
        z1 = rng.standard_normal() + 1j * rng.standard_normal()
        for eps in (1e-4, 1e-5):
            z2 = z1 + eps * np.exp(0.3j)
            val = (z2 - z1) * kernel_h(n, z1, z2)
            assert abs(val - 1.0 / (2j * math.pi)) < 1e-3 * eps / 1e-5


def test_mobius_identity_and_composition():
    rng = np.random.default_rng(3)
    assert Mobius.identity().apply(0.7 - 0.2j) == 0.7 - 0.2j
    for _ in range(100):
        g1, g2 = Mobius.random(rng), Mobius.random(rng)
        z = rng.standard_normal() + 1j * rng.standard_normal()
        lhs = g1.apply(g2.apply(z))
        rhs = g1.compose(g2).apply(z)
        assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(rhs))


def test_mobius_metric_invariance():
    # density 1/D^2 transforms with the |f'|^2 factor cancelling exactly
    rng = np.random.default_rng(4)
    for _ in range(20):
        g = Mobius.random(rng)
        z = rng.standard_normal() + 1j * rng.standard_normal()
        fz = g.apply(z)
        p = -np.conj(g.b) * z + np.conj(g.a)
        fprime2 = 1.0 / abs(p) ** 4
        lhs = fprime2 / (1.0 + abs(fz) ** 2) ** 2
        rhs = 1.0 / (1.0 + abs(z) ** 2) ** 2
        assert abs(lhs - rhs) < 1e-12 * rhs


def test_mobius_poles_and_infinity():
    r = 1.0 / math.sqrt(2.0)
    g = Mobius(r, r)  # pole at z = 1 exactly, even in floats
    assert np.isinf(g.apply(1.0))
    far = g.apply(np.inf)
    assert far == pytest.approx(g.a / (-np.conj(g.b)))


def test_invariance_law():
    rng = np.random.default_rng(5)
    for n in range(-4, 3):
        worst = 0.0
        for z1, z2 in separated_pairs(rng, 100, min_chordal=0.05):
            g = Mobius.random(rng)
            worst = max(worst, float(check_invariance(n, g, z1, z2)))
        assert worst < 1e-10
        assert check_invariance(n, Mobius.identity(), 0.4 + 0.1j, -0.3 + 0.9j) == 0.0


def test_reduction_to_origin():
    rng = np.random.default_rng(6)
    for n in (-1, 0, 1, 2):
        for z1, z2 in separated_pairs(rng, 20, min_chordal=0.05):
            theta = rng.uniform()
            assert reduction_residual(n, z1, z2, theta) < 1e-12


def test_holomorphy_by_finite_differences():
    rng = np.random.default_rng(7)
    for n in range(-4, 3):
        worst = 0.0
        for z1, z2 in separated_pairs(rng, 20, min_chordal=0.45, max_chordal=0.9):
            worst = max(worst, float(check_holomorphy(n, z1, z2, step=1e-4)))
        assert worst < 1e-7


def test_g_kernel_blocks():
    z1, z2 = 0.3 + 0.4j, -0.7 + 0.1j
    blocks = kernel_hG(z1, z2)
    assert [b[0] for b in blocks] == [-4, -3, -2, 0, 1, 2]
    assert [b[1] for b in blocks] == [1, 2, 1, 1, 2, 1]
    for n, _, val in blocks:
        assert val == kernel_h(n, z1, z2)


def test_offdiag_dbar_identity():
    rng = np.random.default_rng(8)
    for n, tol in ((-1, 1e-8), (0, 1e-6), (2, 1e-6), (-4, 1e-6)):
        pairs = separated_pairs(rng, 10)
        z1 = np.array([p[0] for p in pairs])
        z2 = np.array([p[1] for p in pairs])
        assert check_offdiag_dbar(n, z1, z2).max() < tol


# quadrature operators are slow to assemble; share one per twist
_CACHE = {}


def _hq(n):
    if n not in _CACHE:
        m = build_model(n, 6)
        _CACHE[n] = (m, KernelHomotopy(m, order=32, target_order=24))
    return _CACHE[n]


def test_quadrature_agrees_with_spectral_homotopy():
    for n in (-4, 0, 2):
        m, hq = _hq(n)
        err, sign = operator_agreement(m, hq, 5)
        assert sign == 1.0
        assert err < 5e-5


def test_quadrature_kills_harmonic_forms():
    m, hq = _hq(-4)
    out = hq.matrix()[:, :m.n_harm1]
    assert np.abs(out).max() < 5e-5


def test_quadrature_chain_identity():
    rng = np.random.default_rng(9)
    for n in (-4, 0):
        m, hq = _hq(n)
        assert chain_identity_quadrature(m, hq, rng, samples=10) < 5e-5


def test_quadrature_zero_in_zero_out():
    m, hq = _hq(0)
    assert np.abs(hq.apply(np.zeros(m.dim1))).max() == 0.0


def test_excision_mode_runs_but_is_cruder():
    m, hq = _hq(0)
    he = KernelHomotopy(m, order=32, target_order=24, mode="excision")
    err_e, _ = operator_agreement(m, he, 5)
    err_c, _ = operator_agreement(m, hq, 5)
    assert np.all(np.isfinite(he.matrix()))
    assert err_c < err_e


def test_chordal_distance_range():
    assert chordal(0.0, np.array([1e8])) == pytest.approx(1.0, abs=1e-6)
    assert chordal(0.3 + 0.1j, 0.3 + 0.1j) == 0.0
