"""Univalent pairs, Faber polynomials and generalized Grunsky coefficients."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .series import (
    SeriesError,
    TruncatedSeries,
    comp_inverse,
    compose,
    log_unit,
    power,
    project,
    reciprocal,
)

NORMALIZATION_TOL = 1e-12
SYMMETRY_TOL = 1e-8


class PairError(ValueError):
    pass


class SymmetryViolation(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class UnivalentPair:
    """``f(z) = a1 z + a2 z^2 + ...`` at 0 and ``g(z) = b z + b0 + b1/z + ...`` at infinity.

    ``role`` is ``"forward"`` for a pair ``(f, g)`` and ``"inverse"`` for the
    pair ``(F, G) = (f^-1, g^-1)``.
    """

    f: TruncatedSeries
    g: TruncatedSeries
    role: str = "forward"

    def __post_init__(self):
        f, g = self.f, self.g
        if f.order != g.order:
            raise PairError("f and g must share the ambient order")
        n = f.order
        if np.any(f.coeffs[: n + 1]):
            raise PairError("f must have no constant or negative terms")
        if np.any(g.coeffs[n + 2:]):
            raise PairError("g must have no powers above z")
        if abs(f[1]) == 0 or abs(g[1]) == 0:
            raise PairError("a1 and b must be nonzero")
        if abs(f[1] * g[1] - 1) > NORMALIZATION_TOL:
            raise PairError(f"normalization a1*b = {f[1] * g[1]} != 1")
        if self.role not in ("forward", "inverse"):
            raise PairError(f"unknown role {self.role!r}")

    @classmethod
    def from_coeffs(cls, a, bs, order: int | None = None, role: str = "forward") -> "UnivalentPair":
        """Build from ``a = [a1, ..., aN]`` and ``bs = [b0, ..., bN]``; ``b = 1/a1``."""
        a = np.asarray(a, complex)
        bs = np.asarray(bs, complex)
        n = order or max(len(a), len(bs) - 1, 1)
        f = TruncatedSeries.from_range(1, a, n)
        g = TruncatedSeries.from_dict({1: 1.0 / a[0], **{-k: bs[k] for k in range(len(bs))}}, n)
        return cls(f, g, role)

    @classmethod
    def identity(cls, order: int) -> "UnivalentPair":
        return cls.from_coeffs([1.0], [0.0], order)

    @property
    def order(self) -> int:
        return self.f.order

    @property
    def a1(self) -> complex:
        return self.f[1]

    @property
    def b(self) -> complex:
        return self.g[1]

    @property
    def a(self) -> np.ndarray:
        """``[a1, ..., aN]``."""
        return self.f.coefficients(1, self.order)

    @property
    def bs(self) -> np.ndarray:
        """``[b0, b1, ..., bN]``."""
        return self.g.coefficients(-self.order, 0)[::-1]

    def with_order(self, order: int) -> "UnivalentPair":
        return UnivalentPair(self.f.with_order(order), self.g.with_order(order), self.role)

    @cached_property
    def inverse(self) -> "UnivalentPair":
        """The pair ``(F, G) = (f^-1, g^-1)``."""
        try:
            F = comp_inverse(self.f, "zero", method="contour")
            G = comp_inverse(self.g, "inf", method="contour")
        except SeriesError:
            F = comp_inverse(self.f, "zero")
            G = comp_inverse(self.g, "inf")
        role = "inverse" if self.role == "forward" else "forward"
        # F'(0) G'(inf) = b a1 = 1 holds up to rounding; renormalize exactly
        F = TruncatedSeries(np.where(F.exponents() == 1, 1.0 / G[1], F.coeffs), F.order)
        return UnivalentPair(F, G, role)

    def swapped(self) -> "UnivalentPair":
        """``(1/g(1/z), 1/f(1/z))``: the pair of the domains inverted by ``z -> 1/z``."""
        n = self.order
        # g(1/z) and f(1/z) are the reflections of the coefficient arrays
        g_inv = TruncatedSeries(self.g.coeffs[::-1], n)
        f_inv = TruncatedSeries(self.f.coeffs[::-1], n)
        ft = reciprocal(g_inv, "zero")
        gt = reciprocal(f_inv, "inf")
        gt = TruncatedSeries(np.where(gt.exponents() == 1, 1.0 / ft[1], gt.coeffs), n)
        return UnivalentPair(ft, gt, self.role)

    def to_json(self) -> dict:
        return {
            "role": self.role,
            "order": self.order,
            "a": [[k, float(v.real), float(v.imag)] for k, v in enumerate(self.a, start=1)],
            "b": [float(self.b.real), float(self.b.imag)],
            "bs": [[k, float(v.real), float(v.imag)] for k, v in enumerate(self.bs)],
        }


# -- Faber polynomials --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FaberSet:
    order: int
    P: list
    Q: list


def faber(pair: UnivalentPair, n: int) -> tuple[TruncatedSeries, TruncatedSeries]:
    """``P_n = (G^n)_{>=0}`` and ``Q_n = (F^-n)_{<=0}`` for the pair's inverses."""
    if not 1 <= n <= pair.order:
        raise ValueError(f"Faber index {n} outside 1..{pair.order}")
    inv = pair.inverse
    P = project(power(inv.g, n, "inf"), "geq0")
    Q = project(power(inv.f, -n, "zero"), "leq0")
    return P, Q


def faber_set(pair: UnivalentPair, size: int) -> FaberSet:
    P, Q = zip(*(faber(pair, n) for n in range(1, size + 1)))
    return FaberSet(size, list(P), list(Q))


# -- Grunsky coefficients -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class GrunskyMatrix:
    """Entries ``b_{m,n}`` for ``|m|, |n| <= order``, stored with offset ``order``."""

    order: int
    entries: np.ndarray

    def __getitem__(self, mn) -> complex:
        m, n = mn
        k = self.order
        if abs(m) > k or abs(n) > k:
            raise IndexError(f"({m}, {n}) outside order {k}")
        return complex(self.entries[m + k, n + k])

    def asymmetry(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.T)))

    def to_json(self) -> dict:
        e = self.entries
        return {
            "order": self.order,
            "index_offset": self.order,
            "re": e.real.tolist(),
            "im": e.imag.tolist(),
        }


@dataclass(frozen=True)
class GrunskyReport:
    matrix: GrunskyMatrix
    faber: FaberSet
    mixed_discrepancy: float
    constant_discrepancy: float


def _grunsky_parts(pair: UnivalentPair, size: int | None = None) -> GrunskyReport:
    n_ord = pair.order
    K = size if size is not None else n_ord // 2
    if K < 1 or 2 * K > n_ord + 1:
        raise ValueError(f"Grunsky size {K} needs order >= {2 * K - 1}")
    f, g = pair.f, pair.g
    B = np.zeros((2 * K + 1, 2 * K + 1), complex)

    def put(m, n, v):
        B[m + K, n + K] = v

    Lg = log_unit(g.shift(-1))
    Lf = log_unit(f.shift(-1))
    put(0, 0, np.log(pair.b))
    for m in range(1, K + 1):
        put(m, 0, -Lg[-m])
        put(0, m, -Lg[-m])
        put(-m, 0, -Lf[m])
        put(0, -m, -Lf[m])

    fs = faber_set(pair, K)
    mixed_fwd = np.zeros((K, K), complex)  # b_{n,-m} from P_n(f)
    mixed_bwd = np.zeros((K, K), complex)  # b_{m,-n} from Q_n(g)
    const_err = 0.0
    for n in range(1, K + 1):
        Pg = compose(fs.P[n - 1], g, "inf")
        Pf = compose(fs.P[n - 1], f, "zero")
        Qf = compose(fs.Q[n - 1], f, "zero")
        Qg = compose(fs.Q[n - 1], g, "inf")
        const_err = max(const_err, abs(Pf[0] / n - B[n + K, K]), abs(-Qg[0] / n - B[-n + K, K]))
        for m in range(1, K + 1):
            put(n, m, Pg[-m] / n)
            put(-n, -m, Qf[m] / n)
            mixed_fwd[n - 1, m - 1] = Pf[m] / n
            mixed_bwd[m - 1, n - 1] = Qg[-m] / n
    for n in range(1, K + 1):
        for m in range(1, K + 1):
            put(n, -m, mixed_fwd[n - 1, m - 1])
            put(-m, n, mixed_fwd[n - 1, m - 1])
    disc = float(np.max(np.abs(mixed_fwd - mixed_bwd)))
    return GrunskyReport(GrunskyMatrix(K, B), fs, disc, const_err)


def grunsky(pair: UnivalentPair, size: int | None = None, check: bool = True) -> GrunskyMatrix:
    """Generalized Grunsky coefficients of ``pair`` up to index ``size`` (default order // 2).

    Mixed entries ``b_{n,-m}`` come from ``P_n o f`` and are cross-checked
    against ``Q_m o g``; disagreement beyond ``1e-8`` raises
    :class:`SymmetryViolation`.
    """
    rep = _grunsky_parts(pair, size)
    if check:
        worst = max(rep.mixed_discrepancy, rep.matrix.asymmetry())
        if worst > SYMMETRY_TOL:
            raise SymmetryViolation(
                f"two routes to the Grunsky coefficients disagree by {worst:.3e}; "
                "increase the series order"
            )
    return rep.matrix


def faber_residuals(pair: UnivalentPair, size: int | None = None) -> dict[str, float]:
    """Max coefficient residuals of the four Faber expansions against the Grunsky matrix."""
    rep = _grunsky_parts(pair, size)
    B, fs, K = rep.matrix, rep.faber, rep.matrix.order
    f, g = pair.f, pair.g
    out = {"P(g)": 0.0, "P(f)": 0.0, "Q(g)": 0.0, "Q(f)": 0.0}
    for n in range(1, K + 1):
        z = TruncatedSeries.zeros(pair.order)
        e_Pg = {n: 1.0, **{-m: n * B[n, m] for m in range(1, K + 1)}}
        e_Pf = {0: n * B[n, 0], **{m: n * B[n, -m] for m in range(1, K + 1)}}
        e_Qg = {0: -n * B[-n, 0], **{-m: n * B[m, -n] for m in range(1, K + 1)}}
        e_Qf = {-n: 1.0, **{m: n * B[-n, -m] for m in range(1, K + 1)}}
        for key, comp, exp, rng in (
            ("P(g)", compose(fs.P[n - 1], g, "inf"), e_Pg, range(-K, n + 1)),
            ("P(f)", compose(fs.P[n - 1], f, "zero"), e_Pf, range(0, K + 1)),
            ("Q(g)", compose(fs.Q[n - 1], g, "inf"), e_Qg, range(-K, 1)),
            ("Q(f)", compose(fs.Q[n - 1], f, "zero"), e_Qf, range(-n, K + 1)),
        ):
            ref = TruncatedSeries.from_dict(exp, z.order)
            diff = max(abs(comp[k] - ref[k]) for k in rng)
            out[key] = max(out[key], diff)
    return out


@dataclass(frozen=True)
class ComplementarityReport:
    B: np.ndarray
    C: np.ndarray
    cond_B: float
    cond_C: float


def complementarity_diagnostic(pair: UnivalentPair, size: int | None = None) -> ComplementarityReport:
    """Condition numbers of the truncated matrices ``sqrt(mn) b_{-m,n}`` and ``sqrt(mn) b_{m,-n}``."""
    G = grunsky(pair, size, check=False)
    K = G.order
    idx = np.arange(1, K + 1)
    s = np.sqrt(np.outer(idx, idx))
    Bm = np.array([[G[-m, n] for n in idx] for m in idx]) * s
    Cm = np.array([[G[m, -n] for n in idx] for m in idx]) * s
    return ComplementarityReport(Bm, Cm, float(np.linalg.cond(Bm)), float(np.linalg.cond(Cm)))
