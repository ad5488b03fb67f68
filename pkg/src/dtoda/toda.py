"""Dispersionless Toda structure of a pair: Lax series, Orlov-Schulman functions and FD residual checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coords import CoordinateVector
from .families import FAMILY_ORDER, ChartFamily, FamilyPoint, HomeoFamily, PairFamily, pmap
from .grunsky import UnivalentPair
from .series import TruncatedSeries, circle_nodes, derivative, mul, power, project, reciprocal
from .tau import TailDivergence
from .welding import WeldingError

ORLOV_TAIL = 1e-8
ORLOV_NOISE = 1e-8
# compared coefficients |k| <= WINDOW; beyond it the Lax series carry inversion roundoff
WINDOW = FAMILY_ORDER // 2
GROWTH_LIMIT = 1e12


class EvaluationOffDomain(ArithmeticError):
    pass


@dataclass(frozen=True, eq=False)
class LaxPair:
    """``L = r p + u_1 + u_2/p + ...`` and ``Linv_tilde = r/p + ut_1 + ut_2 p + ...``."""

    L: TruncatedSeries
    Ltilde_inv: TruncatedSeries
    source: str

    def __post_init__(self):
        r1, r2 = self.L[1], self.Ltilde_inv[-1]
        if abs(r1 - r2) > 1e-10 * max(1.0, abs(r1)):
            raise ValueError(f"leading coefficients differ: {r1} vs {r2}")

    @property
    def r(self) -> complex:
        return complex(self.L[1])

    @classmethod
    def from_pair(cls, pair: UnivalentPair, chart: str) -> "LaxPair":
        """``(L, Lt) = (g, f)`` in the direct/extended charts and ``(g^-1, f^-1)`` in the inverse chart."""
        if chart == "inverse":
            inv = pair.inverse
            L, Lt = inv.g, inv.f
        else:
            L, Lt = pair.g, pair.f
        return cls(L, reciprocal(Lt, "zero"), chart)


def b_operator(L: TruncatedSeries, n: int) -> TruncatedSeries:
    """``B_n = (L^n)_{>0} + (L^n)_0 / 2``."""
    if n < 1:
        raise ValueError("n must be positive")
    P = power(L, n, "inf")
    return project(P, "pos") + project(P, "zero") * 0.5


def b_tilde_operator(Ltilde_inv: TruncatedSeries, n: int) -> TruncatedSeries:
    """``Bt_n = (Lt^-n)_{<0} + (Lt^-n)_0 / 2``, from ``Lt^-1``."""
    if n < 1:
        raise ValueError("n must be positive")
    P = power(Ltilde_inv, n, "zero")
    return project(P, "neg") + project(P, "zero") * 0.5


def poisson(A: TruncatedSeries, A_t0: TruncatedSeries, B: TruncatedSeries, B_t0: TruncatedSeries) -> TruncatedSeries:
    """``{A, B}_T = p A_p B_t0 - p A_t0 B_p``."""
    pA = derivative(A).shift(1)
    pB = derivative(B).shift(1)
    return mul(pA, B_t0) - mul(A_t0, pB)


# -- Orlov-Schulman functions and Riemann-Hilbert relations --------------------

@dataclass(frozen=True, eq=False)
class OrlovPair:
    M: TruncatedSeries
    Mtilde: TruncatedSeries


def _orlov_cut(c: CoordinateVector, Lv: np.ndarray, Ltv: np.ndarray) -> int:
    """Last index whose terms' propagated roundoff stays within ORLOV_NOISE."""
    if c.err_t is None:
        return c.order
    up, dn = np.max(np.abs(Lv)), np.max(np.abs(1 / Lv))
    tup, tdn = np.max(np.abs(Ltv)), np.max(np.abs(1 / Ltv))
    for n in range(1, c.order + 1):
        i, j = c.order + n, c.order - n
        err = (n * c.err_t[i] * up ** n + c.err_v[i] * dn ** n
               + n * c.err_t[j] * tdn ** n + c.err_v[j] * tup ** n)
        if err > ORLOV_NOISE:
            return n - 1
    return c.order


def _orlov_values(c: CoordinateVector, Lv: np.ndarray, Ltv: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    K = _orlov_cut(c, Lv, Ltv)
    tail = max(abs(c.vn(K)) * np.max(np.abs(Lv) ** -K), abs(c.vn(-K)) * np.max(np.abs(Ltv) ** K)) if K else np.inf
    if not np.isfinite(tail) or tail > ORLOV_TAIL:
        raise TailDivergence(f"Orlov tail |v_N L^-N| = {tail:.2e} on the nodes (N = {K})")
    M = np.full_like(Lv, c.tn(0))
    Mt = np.full_like(Ltv, c.tn(0))
    for n in range(1, K + 1):
        M += n * c.tn(n) * Lv ** n + c.vn(n) * Lv ** (-n)
        Mt -= n * c.tn(-n) * Ltv ** (-n) + c.vn(-n) * Ltv ** n
    return M, Mt


def orlov(c: CoordinateVector, lax: LaxPair) -> OrlovPair:
    """``M = sum n t_n L^n + t_0 + sum v_n L^-n`` and ``Mt = -sum n t_-n Lt^-n + t_0 - sum v_-n Lt^n`` as series.

    All stored coordinates are used; the tail is checked on the unit circle.
    """
    L, Lti = lax.L, lax.Ltilde_inv
    w = circle_nodes(4 * L.order + 4)
    _orlov_values(c, L.evaluate(w), 1 / Lti.evaluate(w))
    Linv = reciprocal(L, "inf")
    Lt = reciprocal(Lti, "zero")
    M = TruncatedSeries.constant(c.tn(0), L.order)
    Mt = TruncatedSeries.constant(c.tn(0), L.order)
    Lp, Lm, Ltp, Ltm = L, Linv, Lt, Lti
    for n in range(1, c.order + 1):
        M = M + Lp * (n * c.tn(n)) + Lm * c.vn(n)
        Mt = Mt - Ltm * (n * c.tn(-n)) - Ltp * c.vn(-n)
        Lp, Lm, Ltp, Ltm = mul(Lp, L), mul(Lm, Linv), mul(Ltp, Lt), mul(Ltm, Lti)
    for s in (M, Mt):
        if s.norm() > GROWTH_LIMIT:
            raise EvaluationOffDomain("Orlov series coefficients grow without bound")
    return OrlovPair(M, Mt)


@dataclass(frozen=True)
class RHResidual:
    res1: float
    res2: float
    m_equals_mt: float


def rh_residual(pair: UnivalentPair, c: CoordinateVector, grid: int = 256, gamma=None) -> RHResidual:
    """Sup over nodes of ``L^-1 M - Lt^-1``, ``Lt Mt - L`` and ``M - Mt``.

    Direct/extended chart: nodes on the unit circle, ``L = g(w)``, ``Lt = f(w)``.
    Inverse chart: nodes ``z = f(w)`` on the welded curve, where ``Lt = F(z) = w``
    and ``L = G(z) = gamma(w)``; ``gamma`` must be supplied.
    """
    w = circle_nodes(grid)
    if c.chart == "inverse":
        if gamma is None:
            raise ValueError("inverse chart needs gamma to pull the curve back")
        Lv, Ltv = gamma(w), w
        # G(f(w)) = G(g(gamma(w))) = gamma(w); check the pair really is the welding of gamma
        weld_gap = np.max(np.abs(pair.f.evaluate(w) - pair.g.evaluate(Lv)))
        if weld_gap > 1e-8:
            raise ValueError(f"pair does not weld gamma (gap {weld_gap:.2e})")
    else:
        Lv, Ltv = pair.g.evaluate(w), pair.f.evaluate(w)
    if np.max(np.abs(Lv)) > GROWTH_LIMIT or np.max(np.abs(Ltv)) > GROWTH_LIMIT:
        raise EvaluationOffDomain("Lax series diverge on the nodes")
    M, Mt = _orlov_values(c, Lv, Ltv)
    r1 = np.max(np.abs(M / Lv - 1 / Ltv))
    r2 = np.max(np.abs(Ltv * Mt - Lv))
    return RHResidual(float(r1), float(r2), float(np.max(np.abs(M - Mt))))


# -- finite-difference residuals ----------------------------------------------

def _lax_of(family: ChartFamily, point: FamilyPoint) -> LaxPair:
    if isinstance(family, PairFamily):
        return LaxPair.from_pair(family.pair(point.x), family.chart)
    if isinstance(family, HomeoFamily):
        return LaxPair.from_pair(family.solution(point.x).pair, "inverse")
    raise TypeError(f"no Lax pair for {type(family).__name__}")


def _window(s: TruncatedSeries, R: int) -> np.ndarray:
    return s.coefficients(-R, R + 1)


def _fd_series(family: ChartFamily, n: int, h: float, fn) -> list[np.ndarray]:
    """Central differences along ``t_n`` of each series returned by ``fn(LaxPair)``."""
    up = fn(_lax_of(family, family.move({n: h})))
    dn = fn(_lax_of(family, family.move({n: -h})))
    return [(u - d) * (1 / (2 * h)) for u, d in zip(up, dn)]


def lax_residuals(family: ChartFamily, n: int, h: float = 1e-3, window: int | None = None) -> tuple[float, float]:
    """Max coefficient errors of ``dL/dt_n = {B, L}`` and ``dLt^-1/dt_n = {B, Lt^-1}``.

    ``B = B_n`` for ``n > 0`` and ``Bt_|n|`` for ``n < 0``; every ``t_0``
    derivative in the bracket is itself a central difference. Coefficients
    ``|k| <= window`` (default: half the family order, capped at WINDOW) are compared.
    """
    if n == 0 or abs(n) > 3:
        raise ValueError("lax_residual covers 1 <= |n| <= 3")
    R = window or min(family.order // 2, WINDOW)
    Bop = (lambda lx: b_operator(lx.L, n)) if n > 0 else (lambda lx: b_tilde_operator(lx.Ltilde_inv, -n))
    fields = lambda lx: [lx.L, lx.Ltilde_inv, Bop(lx)]
    base = _lax_of(family, family.base)
    dL, dLti, _ = _fd_series(family, n, h, fields)
    L0, Lti0, B0 = _fd_series(family, 0, h, fields)
    B = Bop(base)
    r1 = _window(dL - poisson(B, B0, base.L, L0), R)
    r2 = _window(dLti - poisson(B, B0, base.Ltilde_inv, Lti0), R)
    return float(np.max(np.abs(r1))), float(np.max(np.abs(r2)))


def lax_residual(family: ChartFamily, n: int, h: float = 1e-3, window: int | None = None) -> float:
    """The larger of the two ``lax_residuals``."""
    return max(lax_residuals(family, n, h, window))


def string_residual(family: ChartFamily, h: float = 1e-3, window: int | None = None) -> float:
    """Max coefficient error of ``{L, Lt^-1}_T = 1`` for ``|k| <= window``."""
    R = window or min(family.order // 2, WINDOW)
    base = _lax_of(family, family.base)
    L0, Lti0 = _fd_series(family, 0, h, lambda lx: [lx.L, lx.Ltilde_inv])
    br = poisson(base.L, L0, base.Ltilde_inv, Lti0) - 1.0
    return float(np.max(np.abs(_window(br, R))))


@dataclass(frozen=True)
class VerificationReport:
    check: str
    chart: str
    base: dict
    n: int | None
    h: float
    residual: float
    h_half_residual: float
    ratio: float

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "chart": self.chart,
            "base": self.base,
            "n": self.n,
            "h": self.h,
            "residual": self.residual,
            "h_half_residual": self.h_half_residual,
            "ratio": self.ratio,
        }


def refine(check: str, family: ChartFamily, fn, h: float, n: int | None = None, base_spec: dict | None = None) -> VerificationReport:
    """Evaluate ``fn(h)`` and ``fn(h/2)`` and report the ratio.

    A probe that fails numerically (no welding, no chart inversion) reports
    an infinite residual rather than raising.
    """
    def safe(step):
        try:
            return fn(step)
        except (WeldingError, ArithmeticError):
            return float("inf")

    r1, r2 = pmap(safe, [h, h / 2])
    ratio = r1 / r2 if r2 > 0 else float("inf")
    return VerificationReport(check, family.chart, base_spec or {}, n, h, r1, r2, ratio)
