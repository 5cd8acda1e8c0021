import math

import numpy as np
import pytest

from twistorbf.radial import (
    RadialFun,
    RadialGrid,
    SphereGrid,
    bilinear_integral,
    hermitian_inner,
    integral_exact,
    monomial,
)


def fd_dbar(f, z, h=1e-6):
    # (d/dx + i d/dy) / 2 on chart values
    fx = (f.eval(z + h) - f.eval(z - h)) / (2 * h)
    fy = (f.eval(z + 1j * h) - f.eval(z - 1j * h)) / (2 * h)
    return 0.5 * (fx + 1j * fy)


SAMPLE_Z = np.array([0.3 + 0.1j, -1.2 + 0.8j, 0.05 - 2.3j, 1.0 + 1.0j])


def test_dbar_matches_finite_differences():
    cases = [
        monomial(2, 3, gamma=4),
        monomial(0, 0, gamma=1),
        RadialFun({(1, 0): 2.0, (2, 1): -1.5j}, gamma=3),
    ]
    for f in cases:
        g = f.dbar()
        assert g.weight == f.weight + 1 or g.is_zero()
        want = fd_dbar(f, SAMPLE_Z)
        got = g.eval(SAMPLE_Z)
        assert np.abs(want - got).max() < 1e-8


def test_dbar_kills_holomorphic():
    assert monomial(3, 0).dbar().is_zero()
    assert monomial(0, 0).dbar().is_zero()


def test_product_matches_pointwise():
    f = monomial(2, 1, gamma=2, coeff=1.5)
    g = RadialFun({(0, 2): 1.0, (1, 3): 2.0}, gamma=1)
    fg = f.mul(g)
    assert fg.weight == f.weight + g.weight
    assert np.abs(fg.eval(SAMPLE_Z) - f.eval(SAMPLE_Z) * g.eval(SAMPLE_Z)).max() < 1e-12


def test_conj_and_pad_preserve_values():
    f = RadialFun({(2, 0): 1.0 + 2.0j, (3, 1): -0.5}, gamma=3)
    assert np.abs(f.conj().eval(SAMPLE_Z) - np.conj(f.eval(SAMPLE_Z))).max() < 1e-12
    g = f.pad_gamma(6)
    assert g.gamma == 6
    assert np.abs(g.eval(SAMPLE_Z) - f.eval(SAMPLE_Z)).max() < 1e-12


def test_add_aligns_denominators():
    f = monomial(1, 1, gamma=2)
    g = monomial(0, 0, gamma=4)
    s = f.add(g)
    assert np.abs(s.eval(SAMPLE_Z) - (f.eval(SAMPLE_Z) + g.eval(SAMPLE_Z))).max() < 1e-12


def test_exact_integral_values():
    # int z^a zbar^a D^-g dx dy = pi a! (g-a-2)! / (g-1)!
    assert integral_exact(monomial(0, 0, gamma=2)) == pytest.approx(math.pi)
    assert integral_exact(monomial(1, 1, gamma=4)) == pytest.approx(math.pi * 1 * 1 / 6)
    assert integral_exact(monomial(0, 0, gamma=3)) == pytest.approx(math.pi / 2)
    # off-diagonal terms integrate to zero by symmetry
    assert integral_exact(RadialFun({(2, 1): 7.0}, gamma=5)) == 0.0
    with pytest.raises(ValueError):
        integral_exact(monomial(1, 1, gamma=2))


def test_radial_grid_is_exact_on_the_family():
    grid = RadialGrid(48)
    for a, g in [(0, 2), (1, 4), (3, 9), (10, 25), (0, 40), (17, 40)]:
        f = monomial(a, a, gamma=g)
        numeric = grid.integrate_radial(f.profile(grid.u))
        assert numeric == pytest.approx(integral_exact(f).real, rel=1e-13)


def test_sphere_grid_integrates_mixed_terms():
    grid = SphereGrid(n_radial=24, n_theta=16)
    f = RadialFun({(1, 1): 2.0, (0, 0): 1.0}, gamma=4)
    val = grid.integrate(f.eval(grid.z))
    assert val == pytest.approx(integral_exact(f), rel=1e-12)
    # pure phase integrates to zero over the angle
    g = monomial(3, 1, gamma=6)
    assert abs(grid.integrate(g.eval(grid.z))) < 1e-13


def test_hermitian_and_bilinear_integrals():
    f = monomial(2, 0, gamma=0)
    g = monomial(2, 0, gamma=0)
    # <z^2, z^2> against D^-6: diagonal a=2, gamma=6
    val = hermitian_inner(f, g, 6)
    assert val == pytest.approx(integral_exact(monomial(2, 2, gamma=6)))
    # different weights are orthogonal
    assert hermitian_inner(monomial(1, 0, gamma=2), monomial(2, 0, gamma=2), 2) == 0.0
    h1 = monomial(2, 0, gamma=3)
    h2 = monomial(0, 2, gamma=3)
    assert bilinear_integral(h1, h2) == pytest.approx(integral_exact(monomial(2, 2, gamma=6)))
    assert bilinear_integral(h1, h1) == 0.0


def test_eval_stable_at_large_radius():
    # normalized combination: bounded at infinity once extra carries gamma
    f = RadialFun({(3, 0): 1.0, (4, 1): -2.0}, gamma=0)
    vals = f.eval(np.array([1e6 + 0j, -1e8 + 3e7j]), extra=4.0)
    assert np.all(np.isfinite(vals))
    assert np.abs(vals).max() < 10.0
    # continuity across the chart switch at |z| = 1
    eps = 1e-9
    lo = f.eval(np.array([(1 - eps) * np.exp(0.7j)]), extra=4.0)
    hi = f.eval(np.array([(1 + eps) * np.exp(0.7j)]), extra=4.0)
    assert abs(lo - hi)[0] < 1e-7


def test_boundedness_margin():
    f = monomial(3, 0, gamma=0)
    assert f.boundedness_margin() == pytest.approx(-1.5)
    assert f.boundedness_margin(extra=4.0) == pytest.approx(2.5)


def test_trim_drops_dust():
    f = RadialFun({(0, 0): 1.0, (1, 1): 1e-16}, gamma=2)
    f.trim()
    assert set(f.terms) == {(0, 0)}


def test_weight_mixing_rejected():
    with pytest.raises(ValueError):
        RadialFun({(1, 0): 1.0, (0, 1): 1.0})
