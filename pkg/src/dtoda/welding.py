"""Conformal welding of circle homeomorphisms and its inverse problem."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grunsky import UnivalentPair
from .series import CircleGrid, TruncatedSeries, check_grid, circle_nodes, derivative

CIRCLE_TOL = 1e-10
MOBIUS_GUARD = 0.9
DEFAULT_WELD_ORDER = 120


class WeldingError(RuntimeError):
    pass


class NoConvergence(WeldingError):
    pass


class NotAHomeomorphism(WeldingError, ValueError):
    pass


class TruncationUndersized(WeldingError):
    pass


class NewtonStall(WeldingError):
    def __init__(self, node: int, msg: str):
        super().__init__(f"node {node}: {msg}")
        self.node = node


# -- circle maps --------------------------------------------------------------

@dataclass(frozen=True)
class MobiusParams:
    a: complex
    alpha: float

    def __post_init__(self):
        if abs(self.a) > MOBIUS_GUARD:
            raise ValueError(f"|a| = {abs(self.a):.3f} exceeds the guard {MOBIUS_GUARD}")

    @property
    def s(self) -> float:
        return float(np.sqrt(1 - abs(self.a) ** 2))

    @property
    def b(self) -> complex:
        return np.exp(0.5j * self.alpha) / self.s

    @property
    def c(self) -> complex:
        return -np.conj(self.a) * np.exp(-0.5j * self.alpha) / self.s

    def __call__(self, z):
        a = complex(self.a)
        return np.exp(-1j * self.alpha) * (z + np.conj(a)) / (1 + a * z)

    def deriv(self, z):
        a = complex(self.a)
        return np.exp(-1j * self.alpha) * (1 - abs(a) ** 2) / (1 + a * z) ** 2


@dataclass(frozen=True, eq=False)
class CircleHomeo:
    """A map ``gamma`` of the unit circle, with holomorphic extension to a neighbourhood.

    ``func`` and ``deriv`` evaluate ``gamma`` and ``gamma'`` at arbitrary points
    near the circle; ``spec`` is the JSON description.
    """

    func: Callable
    deriv: Callable
    spec: dict = field(default_factory=dict)

    def __call__(self, w):
        return self.func(np.asarray(w, complex))

    # constructors

    @classmethod
    def identity(cls) -> "CircleHomeo":
        return cls(lambda w: w + 0, lambda w: np.ones_like(w), {"type": "fourier", "coeffs": [[0, 1.0, 0.0]]})

    @classmethod
    def mobius(cls, a: complex, alpha: float) -> "CircleHomeo":
        p = MobiusParams(complex(a), float(alpha))
        spec = {"type": "mobius", "a": [p.a.real, p.a.imag], "alpha": p.alpha}
        return cls(p, p.deriv, spec)

    @classmethod
    def from_fourier(cls, coeffs: dict[int, complex]) -> "CircleHomeo":
        """``gamma(w) = sum_n c_n w^{n+1}``."""
        ks = np.array(sorted(coeffs), dtype=int)
        cs = np.array([coeffs[k] for k in ks], complex)

        def func(w):
            w = np.asarray(w, complex)
            return np.sum(cs[:, None] * w.ravel()[None, :] ** (ks[:, None] + 1), axis=0).reshape(w.shape)

        def deriv(w):
            w = np.asarray(w, complex)
            return np.sum(((ks + 1) * cs)[:, None] * w.ravel()[None, :] ** ks[:, None], axis=0).reshape(w.shape)

        spec = {"type": "fourier", "coeffs": [[int(k), float(c.real), float(c.imag)] for k, c in zip(ks, cs)]}
        return cls(func, deriv, spec)

    @classmethod
    def from_series(cls, s: TruncatedSeries) -> "CircleHomeo":
        """``gamma(w) = w * s(w)``; handy for complexified family points."""
        ds = derivative(s)
        spec = {"type": "fourier", "coeffs": [[int(k), float(s[k].real), float(s[k].imag)] for k in s.support()]}
        return cls(lambda w: w * s.evaluate(w), lambda w: s.evaluate(w) + w * ds.evaluate(w), spec)

    @classmethod
    def perturbed_mobius(cls, a: complex, alpha: float, modes: dict[int, complex]) -> "CircleHomeo":
        """Möbius map composed with ``h(w) = w exp(i rho(w))``, ``rho = sum Re(c_n w^n)`` on the circle.

        ``rho`` is extended holomorphically as ``sum (c_n w^n + conj(c_n) w^-n) / 2``,
        so ``h`` maps the circle to itself.
        """
        p = MobiusParams(complex(a), float(alpha))
        ks = np.array(sorted(modes), dtype=int)
        cs = np.array([modes[k] for k in ks], complex)

        def rho(w):
            w = np.asarray(w, complex)[..., None]
            return 0.5 * np.sum(cs * w ** ks + np.conj(cs) * w ** (-ks), axis=-1)

        def drho(w):
            w = np.asarray(w, complex)[..., None]
            return 0.5 * np.sum(ks * (cs * w ** (ks - 1) - np.conj(cs) * w ** (-ks - 1)), axis=-1)

        def h(w):
            return w * np.exp(1j * rho(w))

        def dh(w):
            return np.exp(1j * rho(w)) * (1 + 1j * w * drho(w))

        spec = {
            "type": "perturbed_mobius",
            "base": {"type": "mobius", "a": [p.a.real, p.a.imag], "alpha": p.alpha},
            "modes": [[int(k), float(c.real), float(c.imag)] for k, c in zip(ks, cs)],
        }
        return cls(lambda w: p(h(w)), lambda w: p.deriv(h(w)) * dh(w), spec)

    @classmethod
    def from_json(cls, d: dict) -> "CircleHomeo":
        kind = d.get("type")
        if kind == "mobius":
            return cls.mobius(complex(*d["a"]), float(d["alpha"]))
        if kind == "fourier":
            return cls.from_fourier({int(n): complex(re, im) for n, re, im in d["coeffs"]})
        if kind == "perturbed_mobius":
            base = d["base"]
            if base.get("type") != "mobius":
                raise ValueError("perturbed_mobius base must be a mobius map")
            return cls.perturbed_mobius(
                complex(*base["a"]),
                float(base["alpha"]),
                {int(n): complex(re, im) for n, re, im in d["modes"]},
            )
        raise ValueError(f"unknown circle map type {kind!r}")

    # grid views

    def samples(self, m: int) -> CircleGrid:
        return CircleGrid(self(circle_nodes(m)))

    def fourier(self, order: int, m: int) -> TruncatedSeries:
        """``c_n`` with ``gamma(w) = sum c_n w^{n+1}``, as the series of ``gamma(w)/w``."""
        w = circle_nodes(m)
        c = np.fft.fft(self(w) / w) / m
        k = np.arange(-order, order + 1)
        return TruncatedSeries(c[k % m], order)

    def inverse_samples(self, m: int) -> CircleGrid:
        return invert_circle_map(self, m)

    def validate(self, m: int) -> None:
        """Circle-valued and orientation preserving on the ``m``-point grid (refined 4x)."""
        w = circle_nodes(4 * m)
        z = self(w)
        dev = np.max(np.abs(np.abs(z) - 1))
        if dev > CIRCLE_TOL:
            raise NotAHomeomorphism(f"|gamma| deviates from 1 by {dev:.2e}")
        speed = np.real(w * self.deriv(w) / z)
        if np.min(speed) <= 0:
            raise NotAHomeomorphism("arg gamma is not strictly increasing")
        winding = np.sum(np.angle(np.roll(z, -1) / z)) / (2 * np.pi)
        if abs(winding - 1) > 1e-6:
            raise NotAHomeomorphism(f"winding number {winding:.3f}")


def lifted_arg(gamma: CircleHomeo, theta: np.ndarray) -> np.ndarray:
    return np.unwrap(np.angle(gamma(np.exp(1j * theta))))


def invert_circle_map(gamma: CircleHomeo, m: int, dense: int = 16) -> CircleGrid:
    """Samples of ``gamma^-1`` at the ``m`` grid nodes.

    The lifted argument is tabulated on a dense grid to bracket each target
    angle; a safeguarded Newton iteration then refines all nodes at once.
    """
    gamma.validate(m)
    nd = dense * m
    th = 2 * np.pi * np.arange(nd + 1) / nd
    Th = lifted_arg(gamma, th)
    psi = 2 * np.pi * np.arange(m) / m
    psi = Th[0] + np.mod(psi - Th[0], 2 * np.pi)
    j = np.clip(np.searchsorted(Th, psi) - 1, 0, nd - 1)
    lo, hi = th[j], th[j + 1]
    flo = Th[j] - psi
    fhi = Th[j + 1] - psi
    x = lo - flo * (hi - lo) / (fhi - flo)
    for _ in range(60):
        z = np.exp(1j * x)
        val = gamma(z)
        # lift consistently with the bracket endpoint
        F = Th[j] + np.angle(val * np.exp(-1j * Th[j])) - psi
        dF = np.real(z * gamma.deriv(z) / val)
        lo = np.where(F < 0, x, lo)
        hi = np.where(F > 0, x, hi)
        step = F / dF
        xn = x - step
        bad = (xn <= lo) | (xn >= hi)
        xn = np.where(bad, 0.5 * (lo + hi), xn)
        if np.max(np.abs(xn - x)) < 1e-15:
            x = xn
            break
        x = xn
    return CircleGrid(np.exp(1j * x))


# -- welding ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WeldingSolution:
    pair: UnivalentPair
    residual_sup: float
    newton_iters: int
    curve_samples: np.ndarray
    gamma: CircleHomeo
    grid: int
    out_of_band: float = 0.0

    def to_json(self) -> dict:
        return {
            "pair": self.pair.to_json(),
            "residual_sup": self.residual_sup,
            "newton_iters": self.newton_iters,
            "grid": self.grid,
            "out_of_band": self.out_of_band,
            "gamma": self.gamma.spec,
        }


def _pair_residual(pair: UnivalentPair, gamma_vals: np.ndarray, w: np.ndarray) -> np.ndarray:
    return pair.f.evaluate(w) - pair.g.evaluate(gamma_vals)


def mobius_pair(p: MobiusParams, order: int) -> UnivalentPair:
    """Closed-form welding of ``e^{-i alpha}(z + conj a)/(1 + a z)``."""
    a = complex(p.a)
    f = [(1 / p.b) * (-a) ** k for k in range(order)]
    return UnivalentPair.from_coeffs(f, [p.c], order)


def mobius_weld(p: MobiusParams, order: int = DEFAULT_WELD_ORDER, grid: int | None = None) -> WeldingSolution:
    m = grid or _default_grid(order)
    pair = mobius_pair(p, order)
    gamma = CircleHomeo.mobius(p.a, p.alpha)
    w = circle_nodes(m)
    r = _pair_residual(pair, gamma(w), w)
    return WeldingSolution(pair, float(np.max(np.abs(r))), 0, pair.f.evaluate(w), gamma, m)


def _default_grid(order: int) -> int:
    m = 4 * (order + 1)
    return 1 << (m - 1).bit_length()


def fit_mobius(gamma_vals: np.ndarray, w: np.ndarray) -> MobiusParams:
    """Least-squares fit ``gamma = -a w gamma + beta w + delta`` (exact for Möbius maps)."""
    A = np.column_stack([-w * gamma_vals, w, np.ones_like(w)])
    (a, beta, _), *_ = np.linalg.lstsq(A, gamma_vals, rcond=None)
    a = complex(a)
    if abs(a) > MOBIUS_GUARD:
        a *= MOBIUS_GUARD / abs(a)
    return MobiusParams(a, float(-np.angle(beta)))


def _pack(pair: UnivalentPair) -> np.ndarray:
    return np.r_[pair.a, pair.bs]


def _unpack(x: np.ndarray, n: int) -> UnivalentPair:
    return UnivalentPair.from_coeffs(x[:n], x[n:], n)


def weld(
    gamma: CircleHomeo,
    tol: float = 1e-10,
    max_iter: int = 50,
    order: int = DEFAULT_WELD_ORDER,
    grid: int | None = None,
    init: str | UnivalentPair = "mobius",
    check: bool = True,
) -> WeldingSolution:
    """Solve ``f = g o gamma`` on the circle for the normalized pair ``(f, g)``.

    Unknowns are ``a_1..a_N`` and ``b_0..b_N`` with ``b = 1/a_1``; the residual
    is projected onto the Fourier modes ``[-N, N]`` and driven to zero by a
    Levenberg-damped Gauss-Newton iteration. ``check=False`` skips the
    homeomorphism test, for holomorphic perturbations of circle maps.
    ``init`` may also be a pair used as warm start.
    """
    n = order
    m = grid or _default_grid(n)
    check_grid(m, n)
    if check:
        gamma.validate(m)
    w = circle_nodes(m)
    gv = gamma(w)
    if isinstance(init, UnivalentPair):
        pair = init.with_order(n)
    elif init == "mobius":
        pair = mobius_pair(fit_mobius(gv, w), n)
    elif init == "identity":
        pair = UnivalentPair.identity(n)
    else:
        raise ValueError(f"unknown init {init!r}")

    band = np.r_[np.arange(0, n + 1), np.arange(m - n, m)]
    # columns for a_2..a_N and b_1..b_N do not depend on x
    col_a = w[:, None] ** np.arange(1, n + 1)[None, :]
    col_b = -(gv[:, None] ** (-np.arange(0, n + 1))[None, :])
    cols = np.column_stack([col_a, col_b])
    Jfix = (np.fft.fft(cols, axis=0) / m)[band]

    def residual(x):
        r = _pair_residual(_unpack(x, n), gv, w)
        return r, (np.fft.fft(r) / m)[band]

    x = _pack(pair)
    r, R = residual(x)
    cost = np.linalg.norm(R)
    lam = 1e-3
    it = 0
    rejects = 0
    while it < max_iter:
        if np.max(np.abs(r)) < tol or cost < 1e-3 * tol:
            break
        J = Jfix.copy()
        J[:, 0] = (np.fft.fft(w + gv / x[0] ** 2) / m)[band]
        JH = J.conj().T
        A = JH @ J
        g = JH @ R
        d = np.diag(A).real
        while True:
            step = np.linalg.solve(A + lam * np.diag(d), -g)
            xn = x + step
            rn, Rn = residual(xn)
            cn = np.linalg.norm(Rn)
            if cn < cost:
                x, r, R, cost = xn, rn, Rn, cn
                lam = max(lam * 0.3, 1e-12)
                rejects = 0
                break
            lam *= 10
            rejects += 1
            if rejects > 12:
                raise NoConvergence(f"step rejected repeatedly at iteration {it}, |R| = {cost:.3e}")
        it += 1
        if np.linalg.norm(step) < 1e-16 * max(1.0, np.linalg.norm(x)):
            break

    pair = _unpack(x, n)
    full = np.fft.fft(r) / m
    oob_modes = np.ones(m, bool)
    oob_modes[band] = False
    oob = float(np.sum(np.abs(full[oob_modes])))
    res = float(np.max(np.abs(r)))
    if oob > 10 * tol:
        raise TruncationUndersized(
            f"out-of-band residual {oob:.3e} exceeds 10*tol at order {n}; raise the order"
        )
    if res >= tol:
        raise NoConvergence(f"residual {res:.3e} above tol {tol:.1e} after {it} iterations")
    return WeldingSolution(pair, res, it, pair.f.evaluate(w), gamma, m, oob)


def gamma_from_pair(pair: UnivalentPair, m: int, max_iter: int = 60) -> CircleGrid:
    """Recover ``gamma = g^-1 o f`` at the grid nodes.

    A sequential pass predicts the angle ``phi`` of ``g(e^{i phi}) = f(w_k)``
    from the two previous nodes and corrects it with one Gauss-Newton step;
    all nodes are then refined together.
    """
    w = circle_nodes(m)
    target = pair.f.evaluate(w)
    g, dg = pair.g, derivative(pair.g)

    def gn_step(phi, tgt):
        z = np.exp(1j * phi)
        J = 1j * z * dg.evaluate(z)
        return np.real(np.conj(J) * (g.evaluate(z) - tgt)) / np.abs(J) ** 2

    phi = np.empty(m)
    p = float(np.angle(target[0] / pair.b))
    for _ in range(20):
        p -= float(gn_step(p, target[0]))
    phi[0] = p
    for k in range(1, m):
        p = phi[k - 1] + (phi[k - 1] - phi[k - 2] if k > 1 else 2 * np.pi / m)
        for _ in range(2):
            p -= float(gn_step(p, target[k]))
        phi[k] = p
    for _ in range(max_iter):
        step = gn_step(phi, target)
        phi -= step
        if np.max(np.abs(step)) < 1e-15:
            break
    else:
        k = int(np.argmax(np.abs(step)))
        if abs(step[k]) > 1e-11:
            raise NewtonStall(k, f"angle update {step[k]:.2e} after {max_iter} iterations")
    return CircleGrid(np.exp(1j * phi))


def homeo_from_samples(g: CircleGrid, order: int) -> CircleHomeo:
    """Trigonometric interpolant of sampled circle-map values."""
    m = g.M
    w = g.nodes
    c = np.fft.fft(g.samples / w) / m
    return CircleHomeo.from_fourier({k: c[k % m] for k in range(-order, order + 1)})
