"""Finite-dimensional families of pairs and circle maps, addressed through their chart coordinates.

A family maps a complex parameter vector ``x`` to a point (a free pair, or a
perturbed circle map) and the point to its coordinates ``t_{-N..N}``. The
number of parameters equals the number of coordinates, so Newton's method
can move to a point with prescribed coordinates; this is how derivatives
"along ``t_n`` with the other ``t`` fixed" are realized by finite differences.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .coords import DEFAULT_GRID, CoordinateVector, direct_chart, inverse_chart
from .grunsky import UnivalentPair
from .tau import log_tau_direct, log_tau_inverse
from .welding import CircleHomeo, NoConvergence, WeldingSolution, weld

JAC_STEP = 1e-6
COND_MAX = 1e10
CHART_TOL = 1e-10
FD_TOL = 1e-13
FAMILY_ORDER = 24
HOMEO_ORDER = 60
STALL_FACTOR = 10
EMBED_ORDER = 128


class ChartDegenerate(ArithmeticError):
    pass


@dataclass(eq=False)
class FamilyPoint:
    family: "ChartFamily"
    x: np.ndarray
    _jac: np.ndarray | None = field(default=None, repr=False)

    @cached_property
    def t(self) -> np.ndarray:
        return self.family.t_vector(self.x)

    @property
    def jacobian(self) -> np.ndarray:
        if self._jac is None:
            self._jac = self.family.jacobian(self.x)
        return self._jac

    def coords(self, order: int | None = None) -> CoordinateVector:
        return self.family.coords(self.x, order)

    def log_tau(self) -> complex:
        return self.family.log_tau(self.x)


class ChartFamily:
    """Common Newton machinery; subclasses supply ``t_vector``, ``coords`` and ``log_tau``."""

    chart: str
    order: int

    def t_vector(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def coords(self, x: np.ndarray, order: int | None = None) -> CoordinateVector:
        raise NotImplementedError

    def log_tau(self, x: np.ndarray) -> complex:
        raise NotImplementedError

    @property
    def base(self) -> FamilyPoint:
        return self._base

    def index(self, n: int) -> int:
        if abs(n) > self.order:
            raise IndexError(f"t_{n} is outside the family range |n| <= {self.order}")
        return n + self.order

    def jacobian(self, x: np.ndarray, step: float = JAC_STEP) -> np.ndarray:
        """Forward-difference Jacobian ``dt/dx``; raises ChartDegenerate when ill-conditioned."""
        t0 = self.t_vector(x)
        J = np.empty((t0.size, x.size), complex)
        for j in range(x.size):
            xp = x.copy()
            xp[j] += step
            J[:, j] = (self.t_vector(xp) - t0) / step
        cond = np.linalg.cond(J)
        if not np.isfinite(cond) or cond > COND_MAX:
            raise ChartDegenerate(f"chart Jacobian condition number {cond:.2e}")
        return J

    def invert(self, target, start: FamilyPoint | None = None, tol: float = CHART_TOL, max_iter: int = 30) -> FamilyPoint:
        """Newton solve of ``t(x) = target`` starting from ``start`` (default: the base point).

        The start point's Jacobian is reused (chord iteration) and refreshed
        only if a step fails to reduce the residual.
        """
        if isinstance(target, CoordinateVector):
            target = np.array([target.tn(n) for n in range(-self.order, self.order + 1)])
        target = np.asarray(target, complex)
        start = start or self.base
        x = start.x.copy()
        J = start.jacobian
        r = self.t_vector(x) - target
        err = np.max(np.abs(r))
        for _ in range(max_iter):
            if err < tol:
                return FamilyPoint(self, x, J if x is start.x else None)
            x_new = x - np.linalg.solve(J, r)
            r_new = self.t_vector(x_new) - target
            err_new = np.max(np.abs(r_new))
            if err_new >= err:
                J = self.jacobian(x)
                x_new = x - np.linalg.solve(J, r)
                r_new = self.t_vector(x_new) - target
                err_new = np.max(np.abs(r_new))
                if err_new >= err:
                    break
            x, r, err = x_new, r_new, err_new
        # a stall within a decade of tol is the roundoff floor of t(x), not a failure
        if err < STALL_FACTOR * tol:
            return FamilyPoint(self, x)
        raise NoConvergence(f"chart inversion stalled at residual {err:.2e}")

    def move(self, steps: dict[int, complex], tol: float = FD_TOL) -> FamilyPoint:
        """The point whose coordinates differ from the base by ``steps`` (``{n: dt_n}``)."""
        target = self.base.t.copy()
        for n, dt in steps.items():
            target[self.index(n)] += dt
        return self.invert(target, tol=tol)


class PairFamily(ChartFamily):
    """Free pairs ``f = a_1 z + ... + a_{N+1} z^{N+1}``, ``g = z/a_1 + b_0 + ... + b_{N-1} z^{1-N}``.

    Coordinates are the direct (or extended) chart ``t_{-N..N}``; to first
    order ``t_n`` moves with ``a_{n+1}`` and ``t_{-n}`` with ``b_{n-1}``, which
    fixes the degrees. Points are embedded at ``embed`` order so that the
    logarithms entering ``v_0`` are resolved well beyond the polynomial degree.
    """

    def __init__(
        self,
        base: UnivalentPair,
        order: int = FAMILY_ORDER,
        grid: int = DEFAULT_GRID,
        chart: str = "extended",
        embed: int = EMBED_ORDER,
        tau_order: int | None = None,
    ):
        if chart not in ("direct", "extended"):
            raise ValueError("pair families carry the direct or extended chart")
        self.chart, self.order, self.grid, self.embed = chart, order, grid, embed
        self.tau_order = tau_order or 2 * order
        N = order
        a = np.zeros(N + 1, complex)
        bs = np.zeros(N, complex)
        a[: min(N + 1, base.a.size)] = base.a[: N + 1]
        bs[: min(N, base.bs.size)] = base.bs[:N]
        self._base = FamilyPoint(self, np.concatenate([a, bs]))

    def pair(self, x: np.ndarray) -> UnivalentPair:
        N = self.order
        return UnivalentPair.from_coeffs(x[: N + 1], x[N + 1 :], self.embed)

    def t_vector(self, x):
        return direct_chart(self.pair(x), self.order, self.grid, self.chart, with_v0=False).t

    def coords(self, x, order=None):
        return direct_chart(self.pair(x), order or self.order, self.grid, self.chart)

    def log_tau(self, x):
        pair = self.pair(x)
        val = log_tau_direct(pair, direct_chart(pair, self.tau_order, self.grid, self.chart), self.grid)
        return 2 * val.real if self.chart == "extended" else val


class HomeoFamily(ChartFamily):
    """Circle maps ``gamma = gamma_base + sum_{|k|<=N} d_k w^{k+1}`` in the inverse chart.

    Nonzero ``d`` gives a holomorphic deformation that is no longer circle
    valued; coordinates then come from the substitution route, and the
    welding is solved without the homeomorphism check.
    """

    chart = "inverse"

    def __init__(
        self,
        base: CircleHomeo,
        order: int = HOMEO_ORDER,
        grid: int = DEFAULT_GRID,
        weld_order: int = 120,
        tau_order: int | None = None,
    ):
        self.gamma_base, self.order, self.grid, self.weld_order = base, order, grid, weld_order
        self.tau_order = tau_order or 2 * order
        self._base = FamilyPoint(self, np.zeros(2 * order + 1, complex))
        self._welds: dict[bytes, WeldingSolution] = {}
        self._base_sol = weld(base, order=weld_order)

    def gamma(self, x: np.ndarray) -> CircleHomeo:
        if not np.any(x):
            return self.gamma_base
        ks = np.arange(-self.order, self.order + 1)
        base = self.gamma_base
        x = np.array(x, complex)

        def func(w):
            w = np.asarray(w, complex)
            return base(w) + (w[..., None] ** (ks + 1)) @ x

        def deriv(w):
            w = np.asarray(w, complex)
            return base.deriv(w) + (w[..., None] ** ks) @ (x * (ks + 1))

        spec = {"type": "shifted", "base": base.spec, "delta": [[int(k), float(c.real), float(c.imag)] for k, c in zip(ks, x)]}
        return CircleHomeo(func, deriv, spec)

    def solution(self, x: np.ndarray) -> WeldingSolution:
        key = np.asarray(x, complex).tobytes()
        if key not in self._welds:
            if len(self._welds) > 64:
                self._welds.clear()
            if not np.any(x):
                self._welds[key] = self._base_sol
            else:
                self._welds[key] = weld(self.gamma(x), order=self.weld_order, init=self._base_sol.pair, check=False)
        return self._welds[key]

    def t_vector(self, x):
        return inverse_chart(self.gamma(x), order=self.order, grid=self.grid, method="substitution", with_v0=False).t

    def coords(self, x, order=None):
        return inverse_chart(self.gamma(x), self.solution(x), order or self.order, self.grid, method="substitution")

    def log_tau(self, x):
        gamma = self.gamma(x)
        c = inverse_chart(gamma, self.solution(x), self.tau_order, self.grid, method="substitution")
        return log_tau_inverse(gamma, c, self.grid, method="substitution")


def chart_invert(target: CoordinateVector, base: FamilyPoint, tol: float = CHART_TOL) -> FamilyPoint:
    """Point of ``base.family`` whose chart coordinates equal ``target`` (to ``tol``, sup norm)."""
    return base.family.invert(target, start=base, tol=tol)


# -- finite differences -------------------------------------------------------

def richardson(d_h, d_h2):
    """Combine second-order estimates at ``h`` and ``h/2``."""
    return (4 * np.asarray(d_h2) - np.asarray(d_h)) / 3


def derivative_along(family: ChartFamily, n: int, observable, h: float, direction: complex = 1.0):
    """Central difference of ``observable(point)`` along ``t_n`` (step ``h * direction``)."""
    up = observable(family.move({n: h * direction}))
    dn = observable(family.move({n: -h * direction}))
    return (np.asarray(up) - np.asarray(dn)) / (2 * h)


def wirtinger_along(family: ChartFamily, n: int, observable, h: float):
    """``d/dt_n`` of a real observable of complex ``t_n``: ``(D_x - i D_y) / 2``."""
    return 0.5 * (derivative_along(family, n, observable, h) - 1j * derivative_along(family, n, observable, h, 1j))


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("DTODA_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn, items):
    """Map over independent probes, with at most ``DTODA_THREADS`` workers."""
    items = list(items)
    n = _threads()
    if n == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _mixed(family: ChartFamily, m: int, u: complex, n: int, v: complex, h: float, cache: dict) -> complex:
    """Four-point central second difference of ``log tau`` along ``u e_m`` and ``v e_n``."""

    def F(sm, sn):
        steps = {m: sm * h * u}
        steps[n] = steps.get(n, 0) + sn * h * v
        key = tuple(sorted((k, complex(s)) for k, s in steps.items() if s != 0))
        if key not in cache:
            cache[key] = family.move(dict(key)).log_tau() if key else family.base.log_tau()
        return cache[key]

    return (F(1, 1) - F(1, -1) - F(-1, 1) + F(-1, -1)) / (4 * h * h)


def hessian_fd(family: ChartFamily, indices=range(-3, 4), h: float = 1e-3, extrapolate: bool = True) -> np.ndarray:
    """Second derivatives of ``log tau`` in the family's chart, Richardson-combined over ``h`` and ``h/2``.

    For the real extended-chart free energy the entries are Wirtinger
    derivatives ``d^2/dt_m dt_n`` assembled from four real second differences.
    """
    idx = list(indices)
    pairs = [(i, j) for i in range(len(idx)) for j in range(i, len(idx))]
    wirt = family.chart == "extended"

    def entry(ij):
        i, j = ij
        m, n = idx[i], idx[j]
        cache: dict = {}
        out = []
        for step in ((h, h / 2) if extrapolate else (h,)):
            if wirt:
                val = 0.25 * (
                    _mixed(family, m, 1, n, 1, step, cache)
                    - 1j * _mixed(family, m, 1, n, 1j, step, cache)
                    - 1j * _mixed(family, m, 1j, n, 1, step, cache)
                    - _mixed(family, m, 1j, n, 1j, step, cache)
                )
            else:
                val = _mixed(family, m, 1, n, 1, step, cache)
            out.append(val)
        return richardson(*out) if extrapolate else out[0]

    H = np.zeros((len(idx), len(idx)), complex)
    for (i, j), val in zip(pairs, pmap(entry, pairs)):
        H[i, j] = H[j, i] = val
    return H


def gradient_fd(family: ChartFamily, indices=range(-3, 4), h: float = 1e-3, extrapolate: bool = True) -> np.ndarray:
    """First derivatives of ``log tau`` (Wirtinger for the extended chart)."""
    obs = lambda q: q.log_tau()
    along = wirtinger_along if family.chart == "extended" else derivative_along

    def entry(n):
        vals = [along(family, n, obs, s) for s in ((h, h / 2) if extrapolate else (h,))]
        return richardson(*vals) if extrapolate else vals[0]

    return np.array(pmap(entry, list(indices)), complex)
