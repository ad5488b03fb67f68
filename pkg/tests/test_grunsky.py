import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dtoda.grunsky import (
    PairError,
    UnivalentPair,
    complementarity_diagnostic,
    faber,
    faber_residuals,
    grunsky,
)
from oracles import grunsky_bivariate, mobius_pair_coeffs

small = st.floats(-0.04, 0.04, allow_nan=False)
cplx = st.builds(complex, small, small)


def random_pair(seed, n=5, order=24, amp=0.05):
    rng = np.random.default_rng(seed)
    decay = 0.5 ** np.arange(n)
    a = np.r_[np.exp(0.3j), amp * decay * (rng.standard_normal(n) + 1j * rng.standard_normal(n))]
    bs = amp * np.r_[1.0, decay] * (rng.standard_normal(n + 1) + 1j * rng.standard_normal(n + 1))
    return UnivalentPair.from_coeffs(a, bs, order), a, bs


def test_normalization_enforced():
    with pytest.raises(PairError):
        UnivalentPair.from_coeffs([1.0], [0.0], 4).__class__(
            UnivalentPair.identity(4).f * 2, UnivalentPair.identity(4).g
        )


def test_identity_pair_grunsky_is_antidiagonal():
    # log(1 - w/z) = -sum (w/z)^n / n
    G = grunsky(UnivalentPair.identity(8))
    ref = np.zeros_like(G.entries)
    for n in range(1, 5):
        ref[4 + n, 4 - n] = ref[4 - n, 4 + n] = 1 / n
    assert np.max(np.abs(G.entries - ref)) < 1e-15


@pytest.mark.parametrize("seed", range(3))
def test_matches_bivariate_oracle(seed):
    pair, a, bs = random_pair(seed)
    G = grunsky(pair, 5)
    ref = grunsky_bivariate(a, bs, 5)
    err = max(abs(G[m, n] - v) for (m, n), v in ref.items())
    assert err < 1e-12


def test_mobius_entries():
    a, alpha = 0.4 * np.exp(0.2j), 0.9
    f, bs, b = mobius_pair_coeffs(a, alpha, 20)
    G = grunsky(UnivalentPair.from_coeffs(f, bs, 20), 6)
    # log(f/z) = -log b - log(1 + a z), log(g/z) = log b + log(1 + c/(b z))
    for m in range(1, 7):
        assert abs(G[-m, 0] - (-1) ** (m + 1) * a ** m / m) < 1e-13
        assert abs(G[m, 0] + (-1) ** (m + 1) * (bs[0] / b) ** m / m) < 1e-13
    assert abs(G[0, 0] - np.log(b)) < 1e-15


def test_faber_polynomials_of_identity():
    P, Q = faber(UnivalentPair.identity(6), 3)
    assert abs(P[3] - 1) < 1e-15 and abs(Q[-3] - 1) < 1e-15
    assert np.count_nonzero(np.abs(P.coeffs) > 1e-15) == 1


def test_complementarity_identity_is_well_conditioned():
    rep = complementarity_diagnostic(UnivalentPair.identity(8), 4)
    assert rep.cond_C == pytest.approx(1.0)
    rep = complementarity_diagnostic(random_pair(1)[0], 4)
    assert np.isfinite(rep.cond_B) and np.isfinite(rep.cond_C)


@settings(max_examples=25, deadline=None)
@given(st.lists(cplx, min_size=1, max_size=4), st.lists(cplx, min_size=1, max_size=4))
def test_symmetry_and_faber_identities(ta, tb):
    pair = UnivalentPair.from_coeffs([1.0, *ta], tb, 24)
    G = grunsky(pair, 8)
    assert G.asymmetry() < 1e-12
    assert max(faber_residuals(pair, 8).values()) < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.lists(cplx, min_size=1, max_size=4), st.lists(cplx, min_size=1, max_size=4))
def test_inverse_pair_round_trip(ta, tb):
    pair = UnivalentPair.from_coeffs([1.0, *ta], tb, 20)
    back = pair.inverse.inverse
    assert back.f.allclose(pair.f, 1e-10) and back.g.allclose(pair.g, 1e-10)
