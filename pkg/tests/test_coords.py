import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st
from scipy.integrate import dblquad

from dtoda.coords import (
    CoordinateVector,
    cauchy_data,
    cauchy_identity_residual,
    cauchy_jump_residual,
    direct_chart,
    extended_chart,
    inverse_chart,
    wz_moments,
)
from dtoda.series import TruncatedSeries
from dtoda.welding import CircleHomeo, MobiusParams, mobius_pair, weld

from oracles import mobius_direct_coords, mobius_inverse_coords

GRID_A = [0.1, 0.3, 0.5, 0.7, 0.8]
GRID_ALPHA = [0.0, np.pi / 6, np.pi / 2, np.pi]


def test_identity_inverse_chart():
    c = inverse_chart(CircleHomeo.identity(), order=6)
    assert abs(c.tn(0) - 1) < 1e-14
    assert abs(c.vn(0) + 1) < 1e-14
    assert np.max(np.abs(np.delete(c.t, 6))) < 1e-14


def test_mobius_inverse_example_row():
    c = inverse_chart(CircleHomeo.mobius(0.3, 0.0), order=4)
    assert c.tn(0) == pytest.approx(0.91, abs=1e-12)
    assert c.vn(0) == pytest.approx(-1.0858227, abs=1e-7)


def test_mobius_direct_example_row():
    c = direct_chart(mobius_pair(MobiusParams(0.3, 0.0), 128), order=4)
    assert c.tn(1) == pytest.approx(0.3144854, abs=1e-7)
    assert c.tn(0) == pytest.approx(1.0989011, abs=1e-7)
    assert c.vn(1) == pytest.approx(-0.3455884, abs=1e-7)


@pytest.mark.parametrize("alpha", GRID_ALPHA)
@pytest.mark.parametrize("a", GRID_A)
def test_inverse_chart_closed_form(a, alpha):
    c = inverse_chart(CircleHomeo.mobius(a, alpha), order=16)
    o = mobius_inverse_coords(a, alpha)
    for got, ref in [
        (c.tn(1), o["t1"]), (c.tn(0), o["t0"]), (c.tn(-1), o["tm1"]),
        (c.vn(1), o["v"](1)), (c.vn(-1), o["vm"](1)), (c.vn(0), o["v0"]),
    ]:
        assert abs(got - ref) < 1e-8
    for n in range(2, 17):
        assert abs(c.tn(n)) < 1e-9 and abs(c.tn(-n)) < 1e-9


@pytest.mark.parametrize("alpha", GRID_ALPHA)
@pytest.mark.parametrize("a", GRID_A)
def test_direct_chart_closed_form(a, alpha):
    c = direct_chart(mobius_pair(MobiusParams(a, alpha), 128), order=16)
    o = mobius_direct_coords(a, alpha)
    for got, ref in [(c.tn(1), o["t1"]), (c.tn(0), o["t0"]), (c.tn(-1), o["tm1"]), (c.vn(0), o["v0"])]:
        assert abs(got - ref) < 1e-8
    for n in range(1, 9):
        assert abs(c.vn(n) - o["v"](n)) < 1e-8
        assert abs(c.vn(-n) - o["vm"](n)) < 1e-8
    for n in range(9, 17):
        # beyond |n| = 8 the values grow like |c|^n and the roundoff floor scales with them
        assert abs(c.vn(n) - o["v"](n)) < 1e-8 * max(1.0, abs(o["v"](n)))
        assert abs(c.vn(-n) - o["vm"](n)) < 1e-8 * max(1.0, abs(o["vm"](n)))


def test_inverse_chart_methods_agree():
    gamma = CircleHomeo.perturbed_mobius(0.3, 0.2, {2: 0.01, 3: -0.01j})
    a = inverse_chart(gamma, order=12, method="inverse")
    b = inverse_chart(gamma, order=12, method="substitution")
    assert np.max(np.abs(a.t - b.t)) < 1e-11
    assert np.max(np.abs(a.v - b.v)) < 1e-11


def test_t0_equals_fourier_mean():
    gamma = CircleHomeo.perturbed_mobius(0.2j, 0.5, {1: 0.02})
    c = inverse_chart(gamma, order=4)
    assert abs(c.tn(0) - gamma.fourier(2, 256)[0]) < 1e-14


def test_extended_matches_direct_on_welded_pair():
    pair = weld(CircleHomeo.perturbed_mobius(0.2, 0.0, {2: 0.01})).pair
    assert np.max(np.abs(direct_chart(pair, 8).t - extended_chart(pair, 8).t)) == 0


@pytest.mark.parametrize("a, alpha", [(0.3, 0.0), (0.5j, 1.0), (0.2 - 0.4j, np.pi)])
def test_swap_symmetry(a, alpha):
    # z -> 1/z reverses the circle, so the swapped indices come with a sign off n = 0
    pair = weld(CircleHomeo.perturbed_mobius(a, alpha, {2: 0.01, 4: 0.005j})).pair
    c = direct_chart(pair, order=8)
    s = direct_chart(pair.swapped(), order=8)
    for n in range(-8, 9):
        sign = 1 if n == 0 else -1
        assert abs(s.tn(n) - sign * c.tn(-n)) < 1e-9
        assert abs(s.vn(n) - sign * c.vn(-n)) < 1e-9


def test_swap_of_mobius_pair_is_mobius():
    p = MobiusParams(0.4 * np.exp(0.3j), 0.9)
    pair = mobius_pair(p, 128)
    sw = pair.swapped()
    assert abs(sw.g[0] - p.b * p.a) < 1e-13  # constant term of 1/f(1/z) is a*b
    c = direct_chart(sw, order=2)
    assert abs(c.tn(-1) + p.a * p.b) < 1e-12


def test_json_round_trip():
    c = inverse_chart(CircleHomeo.mobius(0.4, 1.0), order=5)
    d = CoordinateVector.from_json(c.to_json())
    assert np.array_equal(d.t, c.t) and np.array_equal(d.v, c.v)


def test_cauchy_transforms():
    pair = weld(CircleHomeo.perturbed_mobius(0.3, 0.4, {3: 0.01})).pair
    c = direct_chart(pair, order=40)
    cd = cauchy_data(pair, order=40)
    assert cauchy_identity_residual(cd, c) < 1e-10
    # the expansions are evaluated on the curve itself, where they converge only geometrically
    assert cauchy_jump_residual(pair, cd) < 1e-6


def _wz_oracle(n):
    z = sp.symbols("z")
    g = z + sp.Rational(1, 5) / z
    gbar = 1 / z + sp.Rational(1, 5) * z  # conj(g) on |z| = 1
    dg = sp.diff(g, z)
    t = sp.residue(sp.expand(g ** (-n) * gbar * dg) if n <= 0 else sp.cancel(g ** (-n) * gbar * dg), z, 0)
    if n > 0:
        # g^-n has poles at 0 and +-sqrt(0.2)i, all inside the circle
        t = sum(sp.residue(sp.cancel(g ** (-n) * gbar * dg), z, p) for p in [0, sp.sqrt(sp.Rational(1, 5)) * sp.I, -sp.sqrt(sp.Rational(1, 5)) * sp.I])
    v = sp.residue(sp.expand(g ** n * gbar * dg), z, 0)
    return complex(t), complex(v)


def test_wz_ellipse_against_residues():
    c = wz_moments(TruncatedSeries.from_dict({1: 1.0, -1: 0.2}, 4), order=4)
    for n in range(0, 5):
        t, v = _wz_oracle(n)
        assert abs(c.tn(n) - t) < 1e-10
        if n:
            assert abs(c.vn(n) - v) < 1e-10
            assert abs(c.tn(-n) + np.conj(c.tn(n))) < 1e-15


def test_wz_unit_circle():
    c = wz_moments(TruncatedSeries.from_dict({1: 1.0}, 2), order=3)
    assert abs(c.tn(0) - 1) < 1e-10 and abs(c.vn(0)) < 1e-10
    assert np.max(np.abs(np.delete(c.t, 3))) < 1e-15


def test_wz_v0_area_integral():
    # ellipse with semi-axes 1.2, 0.8; -1/2 - (1/pi) * integral of log|z| over the interior
    radius = lambda th: 1 / np.sqrt(np.cos(th) ** 2 / 1.44 + np.sin(th) ** 2 / 0.64)
    val, _ = dblquad(lambda r, th: np.log(r) * r, 0, 2 * np.pi, 0, radius, epsabs=1e-13, epsrel=1e-13)
    c = wz_moments(TruncatedSeries.from_dict({1: 1.0, -1: 0.2}, 2), order=1)
    assert abs(c.vn(0) - (-0.5 - val / np.pi)) < 1e-8


@settings(max_examples=20, deadline=None)
@given(st.floats(0.5, 2.0), st.integers(0, 4))
def test_wz_scaling(r, n):
    # t_n scales like r^(2 - n) under z -> r z
    g = TruncatedSeries.from_dict({1: 1.0, -1: 0.15, -2: 0.05j}, 4)
    c1 = wz_moments(g, order=4)
    c2 = wz_moments(TruncatedSeries(g.coeffs * r, 4), order=4)
    assert abs(c2.tn(n) - r ** (2 - n) * c1.tn(n)) < 1e-11 * max(1.0, r ** (2 - n))
