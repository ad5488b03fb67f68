"""Coordinate charts (t_n, v_n) on welded pairs, free pairs and analytic curves."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grunsky import UnivalentPair
from .series import TruncatedSeries, circle_nodes, derivative, log_unit
from .welding import (
    CircleHomeo,
    NotAHomeomorphism,
    WeldingSolution,
    invert_circle_map,
    weld,
)

DEFAULT_ORDER = 16
DEFAULT_GRID = 256
OVERSAMPLE = 4
CHARTS = ("inverse", "direct", "extended", "wz")


class FVanishesOnCircle(ValueError):
    pass


class CurveNotClosedToTolerance(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CoordinateVector:
    """``t_n`` and ``v_n`` for ``|n| <= order``; arrays are indexed by ``n + order``."""

    chart: str
    order: int
    t: np.ndarray
    v: np.ndarray
    # optional roundoff bounds per entry (same layout), filled by quadrature charts
    err_t: np.ndarray | None = None
    err_v: np.ndarray | None = None

    def __post_init__(self):
        if self.chart not in CHARTS:
            raise ValueError(f"unknown chart {self.chart!r}")
        for name in ("t", "v"):
            arr = np.asarray(getattr(self, name), complex)
            if arr.shape != (2 * self.order + 1,):
                raise ValueError(f"{name} must have length 2*order+1")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"non-finite entries in {name}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def tn(self, n: int) -> complex:
        return complex(self.t[n + self.order])

    def vn(self, n: int) -> complex:
        return complex(self.v[n + self.order])

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.order, self.order + 1)

    def truncate(self, order: int) -> "CoordinateVector":
        k = self.order
        sl = slice(k - order, k + order + 1)
        cut = lambda e: None if e is None else e[sl]
        return CoordinateVector(self.chart, order, self.t[sl], self.v[sl], cut(self.err_t), cut(self.err_v))

    def to_json(self) -> dict:
        rows = lambda a: [[int(n), float(x.real), float(x.imag)] for n, x in zip(self.indices, a)]
        return {"chart": self.chart, "order": self.order, "t": rows(self.t), "v": rows(self.v)}

    @classmethod
    def from_json(cls, d: dict) -> "CoordinateVector":
        n = int(d["order"])
        t = np.zeros(2 * n + 1, complex)
        v = np.zeros(2 * n + 1, complex)
        for k, re, im in d["t"]:
            t[int(k) + n] = complex(re, im)
        for k, re, im in d["v"]:
            v[int(k) + n] = complex(re, im)
        return cls(d["chart"], n, t, v)


@dataclass(frozen=True, eq=False)
class GeneratingPotentials:
    """``psi = sum v_{-n}/n z^n`` and ``phi = sum v_n/n z^-n`` (same series serve as Psi, Phi)."""

    psi: TruncatedSeries
    phi: TruncatedSeries

    @classmethod
    def from_coords(cls, c: CoordinateVector) -> "GeneratingPotentials":
        n = c.order
        psi = {k: c.vn(-k) / k for k in range(1, n + 1)}
        phi = {-k: c.vn(k) / k for k in range(1, n + 1)}
        return cls(TruncatedSeries.from_dict(psi, n), TruncatedSeries.from_dict(phi, n))


def _log_parts(pair: UnivalentPair) -> tuple[TruncatedSeries, TruncatedSeries]:
    """``log(f(z)/z)`` and ``log(g(z)/z)`` as series, dropping the coefficient that the shift leaves unknown."""
    n = pair.order
    Lf = log_unit(pair.f.shift(-1))
    Lg = log_unit(pair.g.shift(-1))
    Lf = TruncatedSeries(np.where(Lf.exponents() >= n, 0, Lf.coeffs), n)
    Lg = TruncatedSeries(np.where(Lg.exponents() <= -n, 0, Lg.coeffs), n)
    return Lf, Lg


def _as_pair(sol) -> UnivalentPair:
    if isinstance(sol, WeldingSolution):
        return sol.pair
    return sol


def inverse_chart(
    gamma: CircleHomeo,
    sol: WeldingSolution | UnivalentPair | None = None,
    order: int = DEFAULT_ORDER,
    grid: int = DEFAULT_GRID,
    method: str = "auto",
    with_v0: bool = True,
) -> CoordinateVector:
    """Coordinates read off from ``gamma`` and ``1/gamma^-1``.

    ``t_{-n}, t_0, v_{-n}`` are Fourier coefficients of ``gamma``. For a genuine
    circle map, ``t_n, v_n`` are Fourier coefficients of ``1/gamma^-1``
    sampled through :func:`invert_circle_map` (``method="inverse"``). For a
    complexified point, where ``gamma^-1`` is not available on the circle,
    the same coefficients are obtained by substituting ``w = gamma(u)`` in
    the coefficient integrals (``method="substitution"``), on an oversampled
    grid since ``gamma^{-n}`` carries high-order poles.

    Only ``v_0`` needs the welded pair; ``with_v0=False`` leaves it at zero
    and skips the welding.
    """
    pair = _as_pair(sol)
    if pair is None and with_v0:
        pair = weld(gamma).pair
    N, m = order, grid
    if method == "auto":
        try:
            gamma.validate(m)
            method = "inverse"
        except NotAHomeomorphism:
            method = "substitution"

    t = np.zeros(2 * N + 1, complex)
    v = np.zeros(2 * N + 1, complex)
    mm = m * OVERSAMPLE
    u = circle_nodes(mm)
    gu = gamma(u)
    c = np.fft.fft(gu / u) / mm
    for n in range(1, N + 1):
        t[N - n] = -c[-n % mm] / n
        v[N - n] = -c[n]
    t[N] = c[0]

    if method == "inverse":
        w = circle_nodes(m)
        h = 1.0 / invert_circle_map(gamma, m).samples
        d = np.fft.fft(h) / m
        for n in range(1, N + 1):
            t[N + n] = d[n - 1] / n
            v[N + n] = d[-n - 1]
    elif method == "substitution":
        dgu = gamma.deriv(u)
        p = np.ones_like(gu)
        q = np.ones_like(gu)
        for n in range(1, N + 1):
            p = p / gu
            q = q * gu
            t[N + n] = np.mean(p * dgu) / n
            v[N + n] = np.mean(q * dgu)
    else:
        raise ValueError(f"unknown method {method!r}")
    if not with_v0:
        return CoordinateVector("inverse", N, t, v)
    Lf, Lg = _log_parts(pair)
    df = derivative(pair.f)
    fu = pair.f.evaluate(u)
    if method == "inverse":
        Ib = np.mean(Lg.evaluate(w) * h * w)
    else:
        Ib = np.mean(Lg.evaluate(gu) * dgu)
    Ia = np.mean(Lf.evaluate(u) * gu / u)
    Ic = np.mean(gu * df.evaluate(u) / fu)
    v[N] = Ia - Ib - Ic
    return CoordinateVector("inverse", N, t, v)


INNER_RADII = (1.0, 0.95, 0.9, 0.8, 0.7, 0.6, 0.5)
OUTER_RADII = (1.0, 1.05, 1.1, 1.25, 1.4, 1.6, 2.0)
SERIES_TAIL = 1e-16


def _winding(vals: np.ndarray) -> int:
    d = np.angle(np.roll(vals, -1) / vals)
    return int(round(np.sum(d) / (2 * np.pi)))


@dataclass(frozen=True, eq=False)
class _Circle:
    rho: float
    f: np.ndarray
    g: np.ndarray
    A: np.ndarray
    B: np.ndarray


def _circle(pair: UnivalentPair, rho: float, m: int) -> _Circle:
    z = rho * circle_nodes(m)
    f, g = pair.f.evaluate(z), pair.g.evaluate(z)
    A = derivative(pair.g).evaluate(z) / f * z
    B = g * derivative(pair.f).evaluate(z) / f ** 2 * z
    return _Circle(rho, f, g, A, B)


def _admissible(pair: UnivalentPair, c: _Circle) -> bool:
    """Truncated series still resolved on the circle, and no zero of f or g crossed."""
    n = pair.order
    top_f = np.max(np.abs(pair.f.coeffs[-4:]) * c.rho ** np.arange(n - 3, n + 1, dtype=float))
    top_g = np.max(np.abs(pair.g.coeffs[:4]) * c.rho ** np.arange(-n, -n + 4, dtype=float))
    if top_f > SERIES_TAIL * np.max(np.abs(c.f)) or top_g > SERIES_TAIL * np.max(np.abs(c.g)):
        return False
    if not (np.all(np.isfinite(c.A)) and np.all(np.isfinite(c.B))):
        return False
    if np.min(np.abs(c.f)) < 1e-8 or _winding(c.f) != 1:
        return False
    if c.rho > 1 and (np.min(np.abs(c.g)) < 1e-8 or _winding(c.g) != 1):
        return False
    return True


def _pick(circles: list[_Circle], score) -> _Circle:
    return min(circles, key=score)


def direct_chart(
    pair: UnivalentPair,
    order: int = DEFAULT_ORDER,
    grid: int = DEFAULT_GRID,
    chart: str = "direct",
    with_v0: bool = True,
    deform: bool = True,
) -> CoordinateVector:
    """Coordinates of a pair as contour integrals around the unit circle.

    Works for welded pairs and for free pairs (``chart="extended"``); the
    integrands are the same. Quadrature runs on ``OVERSAMPLE * grid`` nodes.

    Each integrand is analytic on an annulus around the circle, so the
    contour may be moved without changing the value. With ``deform`` the
    ``v_n, t_-n`` integrals (powers of g and f) run on the admissible inner
    circle that keeps them smallest, and ``t_n, v_-n`` (inverse powers) on
    the best outer circle. Admissible means the truncated series are still
    resolved and the argument principle shows no zero of f or g was crossed.
    This removes most of the cancellation in high-index coefficients.
    """
    if chart not in ("direct", "extended"):
        raise ValueError("chart must be 'direct' or 'extended'")
    N = order
    m = grid * OVERSAMPLE
    unit = _circle(pair, 1.0, m)
    if np.min(np.abs(unit.f)) < 1e-8:
        raise FVanishesOnCircle(f"min |f| on the circle is {np.min(np.abs(unit.f)):.2e}")
    inner, outer = [unit], [unit]
    if deform and N > 1:
        for rho in INNER_RADII[1:]:
            c = _circle(pair, rho, m)
            if not _admissible(pair, c):
                break
            inner.append(c)
        for rho in OUTER_RADII[1:]:
            c = _circle(pair, rho, m)
            if not _admissible(pair, c):
                break
            outer.append(c)
    lmax = lambda a: np.log(np.max(np.abs(a)))
    lmin = lambda a: np.log(np.min(np.abs(a)))
    cv = _pick(inner, lambda c: N * lmax(c.g) + lmax(c.A))
    ctm = _pick(inner, lambda c: N * lmax(c.f) + lmax(c.B))
    ct = _pick(outer, lambda c: -N * lmin(c.g) + lmax(c.A))
    cvm = _pick(outer, lambda c: -N * lmin(c.f) + lmax(c.B))

    t = np.zeros(2 * N + 1, complex)
    v = np.zeros(2 * N + 1, complex)
    et = np.zeros(2 * N + 1)
    ev = np.zeros(2 * N + 1)
    eps = np.finfo(float).eps
    t[N] = np.mean(unit.A)

    def run(c: _Circle, base: np.ndarray, weight: np.ndarray, sign: float, scale: bool, out, err, idx):
        p = np.ones_like(base)
        for n in range(1, N + 1):
            p = p * base
            h = p * weight
            k = n if scale else 1
            out[idx(n)] = sign * np.mean(h) / k
            # cancellation in the mean loses eps * max|integrand|
            err[idx(n)] = eps * np.max(np.abs(h)) / k

    run(cv, cv.g, cv.A, 1.0, False, v, ev, lambda n: N + n)
    run(ct, 1 / ct.g, ct.A, 1.0, True, t, et, lambda n: N + n)
    run(ctm, ctm.f, ctm.B, -1.0, True, t, et, lambda n: N - n)
    run(cvm, 1 / cvm.f, cvm.B, -1.0, False, v, ev, lambda n: N - n)
    if not with_v0:
        return CoordinateVector(chart, N, t, v, et, ev)
    w = circle_nodes(m)
    Lf, Lg = _log_parts(pair)
    v[N] = np.mean(Lg.evaluate(w) * unit.A) - np.mean(Lf.evaluate(w) * unit.B) - np.mean(unit.g / unit.f)
    return CoordinateVector(chart, N, t, v, et, ev)


def extended_chart(pair: UnivalentPair, order: int = DEFAULT_ORDER, grid: int = DEFAULT_GRID) -> CoordinateVector:
    return direct_chart(pair, order, grid, chart="extended")


# -- Cauchy transforms --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CauchyData:
    S_plus: TruncatedSeries
    S_minus: TruncatedSeries
    St_plus: TruncatedSeries
    St_minus: TruncatedSeries


def cauchy_data(pair: UnivalentPair, order: int = DEFAULT_ORDER, grid: int = DEFAULT_GRID) -> CauchyData:
    """Expansions of the four Cauchy transforms, each coefficient an independent contour integral.

    ``S(z) = (1/2 pi i) oint (1/f) g' / (g - z) dw`` is expanded in ``z`` at 0 and
    at infinity through the geometric series of ``1/(g - z)``; likewise for
    ``S~`` with ``g f' / (f^2 (f - z))``.
    """
    N = order
    w = circle_nodes(grid * OVERSAMPLE)
    f = pair.f.evaluate(w)
    g = pair.g.evaluate(w)
    A = derivative(pair.g).evaluate(w) / f * w
    B = g * derivative(pair.f).evaluate(w) / f ** 2 * w
    sp, sm, tp, tm = {}, {}, {}, {}
    for k in range(0, N):
        sp[k] = np.mean(A / g ** (k + 1))
        sm[-k - 1] = -np.mean(A * g ** k)
        tp[k] = np.mean(B / f ** (k + 1))
        tm[-k - 1] = -np.mean(B * f ** k)
    mk = lambda d: TruncatedSeries.from_dict(d, N)
    return CauchyData(mk(sp), mk(sm), mk(tp), mk(tm))


def cauchy_identity_residual(cd: CauchyData, c: CoordinateVector) -> float:
    """Distance between the Cauchy expansions and their coordinate form."""
    N = min(c.order, cd.S_plus.order)
    err = abs(cd.S_minus[-1] + c.tn(0)) + abs(cd.St_minus[-1] + c.tn(0))
    for n in range(1, N):
        err = max(
            err,
            abs(cd.S_plus[n - 1] - n * c.tn(n)),
            abs(cd.S_minus[-n - 1] + c.vn(n)),
            abs(cd.St_plus[n - 1] + c.vn(-n)),
            abs(cd.St_minus[-n - 1] - n * c.tn(-n)),
        )
    return float(err)


def cauchy_jump_residual(pair: UnivalentPair, cd: CauchyData, grid: int = DEFAULT_GRID) -> float:
    """Sup over the welded curve of ``(1/f)(w) - [S_+ - S_-](g(w))``."""
    w = circle_nodes(grid)
    z = pair.g.evaluate(w)
    jump = cd.S_plus.evaluate(z) - cd.S_minus.evaluate(z)
    return float(np.max(np.abs(1 / pair.f.evaluate(w) - jump)))


# -- harmonic moments ---------------------------------------------------------

def wz_moments(g: TruncatedSeries, order: int = DEFAULT_ORDER, grid: int = DEFAULT_GRID) -> CoordinateVector:
    """Harmonic moments of the curve ``g(S^1)``, pulled back to the unit circle.

    ``t_n`` and ``v_n`` carry no ``1/n`` factor. ``v_0`` is the exterior
    integral of ``log|z|`` regularized against the exterior of the unit
    disc, ``-1/2 - (1/pi) iint_interior log|z|``; the interior integral is
    reduced by Green's theorem to ``oint F(|z|) d arg z`` with
    ``F(r) = r^2 log(r)/2 - r^2/4``.
    """
    N = order
    w = circle_nodes(grid * OVERSAMPLE)
    z = g.evaluate(w)
    dz = derivative(g).evaluate(w)
    A = np.conj(z) * dz * w
    gap = abs(np.sum(dz * w) / w.size * 2 * np.pi)
    if not np.isfinite(gap):
        raise CurveNotClosedToTolerance("curve samples are not finite")
    t = np.zeros(2 * N + 1, complex)
    v = np.zeros(2 * N + 1, complex)
    t[N] = np.mean(A)
    zp, zm = np.ones_like(z), np.ones_like(z)
    for n in range(1, N + 1):
        zp, zm = zp * z, zm / z
        t[N + n] = np.mean(zm * A)
        v[N + n] = np.mean(zp * A)
        t[N - n] = -np.conj(t[N + n])
        v[N - n] = -np.conj(v[N + n])
    r = np.abs(z)
    F = 0.5 * r ** 2 * np.log(r) - 0.25 * r ** 2
    dtheta = np.real(w * dz / z)
    interior = 2 * np.pi * np.mean(F * dtheta)
    v[N] = -0.5 - interior / np.pi
    return CoordinateVector("wz", N, t, v)
