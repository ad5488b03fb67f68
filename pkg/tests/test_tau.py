import json

import numpy as np
import pytest

from dtoda.coords import direct_chart, extended_chart, inverse_chart
from dtoda.families import HomeoFamily, PairFamily, gradient_fd, hessian_fd
from dtoda.grunsky import UnivalentPair, grunsky
from dtoda.tau import (
    FreeEnergyRecord,
    hessian_pattern,
    log_tau_direct,
    log_tau_extended,
    log_tau_inverse,
    log_tau_sum,
)
from dtoda.welding import CircleHomeo, MobiusParams, mobius_pair, weld

from oracles import mobius_direct_coords, mobius_inverse_coords

GRID_A = [0.1, 0.3, 0.5, 0.7, 0.8]
GRID_ALPHA = [0.0, np.pi / 6, np.pi / 2, np.pi]


def test_identity_both_charts():
    g = CircleHomeo.identity()
    assert abs(log_tau_inverse(g, inverse_chart(g, order=8)) + 0.75) < 1e-10
    pair = UnivalentPair.identity(32)
    assert abs(log_tau_direct(pair, direct_chart(pair, 8)) + 0.75) < 1e-10
    assert abs(log_tau_extended(pair, direct_chart(pair, 8)) + 1.5) < 1e-10


def test_mobius_inverse_value():
    g = CircleHomeo.mobius(0.3, 0.0)
    assert log_tau_inverse(g, inverse_chart(g, order=16)) == pytest.approx(-0.7420243368, abs=1e-9)


def test_mobius_direct_value():
    # the closed form in the direct variables, t0 = 1/0.91 and t1 t_-1 = 0.09/0.91
    t0 = 1 / 0.91
    ref = t0 ** 2 / 2 * np.log(t0) - 0.75 * t0 ** 2 - t0 * 0.09 / 0.91
    pair = mobius_pair(MobiusParams(0.3, 0.0), 128)
    val = log_tau_direct(pair, direct_chart(pair, 16))
    assert abs(val - ref) < 1e-10
    assert val.real == pytest.approx(-0.95742623, abs=1e-8)


@pytest.mark.parametrize("alpha", GRID_ALPHA)
@pytest.mark.parametrize("a", GRID_A)
def test_closed_form_grid(a, alpha):
    g = CircleHomeo.mobius(a, alpha)
    assert abs(log_tau_inverse(g, inverse_chart(g, order=16)) - mobius_inverse_coords(a, alpha)["log_tau"]) < 1e-8
    pair = mobius_pair(MobiusParams(a, alpha), 128)
    assert abs(log_tau_direct(pair, direct_chart(pair, 16)) - mobius_direct_coords(a, alpha)["log_tau"]) < 1e-8


@pytest.mark.parametrize("a, alpha", [(0.3, 0.0), (0.5j, 1.0), (0.2 - 0.1j, 2.0)])
def test_inverse_quadrature_equals_sum(a, alpha):
    g = CircleHomeo.mobius(a, alpha)
    c = inverse_chart(g, order=16)
    assert abs(log_tau_inverse(g, c) - log_tau_sum(c)) < 1e-9


def test_direct_quadrature_equals_sum_on_perturbed_pair():
    pair = weld(CircleHomeo.perturbed_mobius(0.1, 0.3, {2: 0.01, -3: 0.005j})).pair
    c = direct_chart(pair, 32)
    q = log_tau_direct(pair, c, method="quadrature")
    assert abs(q - log_tau_direct(pair, c, method="sum")) < 1e-9


def test_extended_is_twice_real_part():
    pair = weld(CircleHomeo.perturbed_mobius(0.3, 0.5, {2: 0.01})).pair
    c = extended_chart(pair, 16)
    assert log_tau_extended(pair, c) == pytest.approx(2 * log_tau_direct(pair, c).real, abs=1e-14)


def test_record_rejects_complex_extended_value():
    with pytest.raises(ValueError):
        FreeEnergyRecord("extended", -0.75 + 1e-6j)
    rec = FreeEnergyRecord("inverse", -0.75 + 0.1j, [0, 1], np.array([1.0, 2j]))
    out = json.loads(json.dumps(rec.to_json()))
    assert out["log_tau"] == [-0.75, 0.1] and out["gradient"]["im"] == [0.0, 2.0]


class _Stub:
    def __init__(self, vals):
        self.vals = vals

    def __getitem__(self, k):
        return self.vals[k]


def test_hessian_pattern_layout():
    idx = [-1, 0, 1, 2]
    vals = {(m, n): complex(10 * m + n + 100) for m in idx for n in idx}
    H = hessian_pattern(_Stub(vals), idx)
    assert H[1, 1] == -2 * vals[0, 0]
    assert H[3, 1] == 2 * vals[2, 0] and H[1, 3] == 2 * vals[0, 2]
    assert H[0, 3] == -2 * vals[-1, 2]


def test_gradient_identity_inverse_chart():
    fam = HomeoFamily(CircleHomeo.mobius(0.3, 0.0), order=16)
    grad = gradient_fd(fam, range(-3, 4))
    v = fam.base.coords()
    ref = np.array([v.vn(n) for n in range(-3, 4)])
    assert np.max(np.abs(grad - ref)) < 1e-6 * max(1.0, np.max(np.abs(ref)))


def test_gradient_identity_direct_chart_perturbed():
    pair = weld(CircleHomeo.perturbed_mobius(0.2, 0.4, {2: 0.01, 3: -0.005j})).pair
    fam = PairFamily(pair, order=16, chart="direct")
    grad = gradient_fd(fam, range(-3, 4))
    v = fam.base.coords()
    ref = np.array([v.vn(n) for n in range(-3, 4)])
    assert np.max(np.abs(grad - ref)) < 1e-6 * max(1.0, np.max(np.abs(ref)))


def test_second_derivative_examples_inverse_chart():
    fam = HomeoFamily(CircleHomeo.mobius(0.3, 0.0), order=16)
    H = hessian_fd(fam, [-1, 0, 1])
    assert H[1, 1] == pytest.approx(np.log(0.91), abs=1e-6)
    assert H[2, 0] == pytest.approx(-0.91, abs=1e-6)
    assert np.max(np.abs(H - H.T)) < 1e-6
    G = grunsky(weld(CircleHomeo.mobius(0.3, 0.0)).pair, 4)
    assert np.max(np.abs(H - hessian_pattern(G, [-1, 0, 1]))) < 1e-6
