"""Tau functions (free energy) of the three charts and their Grunsky-derivative structure."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coords import OVERSAMPLE, CoordinateVector, GeneratingPotentials
from .grunsky import GrunskyMatrix, UnivalentPair
from .series import TruncatedSeries, circle_nodes, derivative
from .welding import CircleHomeo, invert_circle_map

TAIL_TOL = 1e-13
SUM_BUDGET = 1e-11


class TailDivergence(ArithmeticError):
    pass


def log_tau_sum(c: CoordinateVector, budget: float = SUM_BUDGET) -> complex:
    """``(2 t0 v0 - t0^2 - sum (n-2)(t_n v_n + t_-n v_-n)) / 4``.

    When the coordinates carry roundoff bounds, the sum stops before the
    first term whose propagated error exceeds ``budget``; high-index terms of
    strongly distorted pairs are otherwise pure amplified noise.
    """
    total = 2 * c.tn(0) * c.vn(0) - c.tn(0) ** 2
    for n in range(1, c.order + 1):
        if c.err_t is not None and n > 2:
            err = 0.0
            for k in (n, -n):
                i = k + c.order
                err += (n - 2) * (c.err_t[i] * abs(c.v[i]) + c.err_v[i] * abs(c.t[i]))
            if err > budget:
                break
        total -= (n - 2) * (c.tn(n) * c.vn(n) + c.tn(-n) * c.vn(-n))
    return complex(total / 4)


def log_tau_inverse(
    gamma: CircleHomeo,
    coords: CoordinateVector,
    grid: int = 256,
    method: str = "auto",
) -> complex:
    """Inverse-chart free energy by quadrature of its two circle integrals.

    ``phi`` and ``psi`` are assembled from the stored ``v_n``; ``coords.order``
    should reach well into the decay of ``v_n`` and ``t_n``.
    """
    pot = GeneratingPotentials.from_coords(coords)
    # w phi' + 2 phi and w psi' - 2 psi, coefficientwise
    phi2 = TruncatedSeries(pot.phi.coeffs * (pot.phi.exponents() + 2), pot.phi.order)
    psi2 = TruncatedSeries(pot.psi.coeffs * (pot.psi.exponents() - 2), pot.psi.order)
    if method == "auto":
        try:
            gamma.validate(grid)
            method = "inverse"
        except ValueError:
            method = "substitution"
    u = circle_nodes(grid * OVERSAMPLE)
    gu = gamma(u)
    I2 = np.mean(gu / u * psi2.evaluate(u))
    if method == "inverse":
        w = circle_nodes(grid)
        h = 1.0 / invert_circle_map(gamma, grid).samples
        I1 = np.mean(h * phi2.evaluate(w) * w)
    else:
        I1 = np.mean(phi2.evaluate(gu) * gamma.deriv(u))
    t0, v0 = coords.tn(0), coords.vn(0)
    return complex((2 * t0 * v0 - t0 ** 2 + I1 + I2) / 4)


def _direct_quadrature(pair: UnivalentPair, coords: CoordinateVector, grid: int) -> tuple[complex, float]:
    pot = GeneratingPotentials.from_coords(coords)
    K = coords.order
    w = circle_nodes(grid * OVERSAMPLE)
    f, g = pair.f.evaluate(w), pair.g.evaluate(w)
    A = derivative(pair.g).evaluate(w) / f * w
    B = g * derivative(pair.f).evaluate(w) / f ** 2 * w
    Phi, Psi = pot.phi, pot.psi
    tail = max(
        float(np.max(np.abs(coords.vn(K) / K * g ** (-K)))),
        float(np.max(np.abs(coords.vn(-K) / K * f ** K))),
    )
    I1 = np.mean(A * (g * derivative(Phi).evaluate(g) + 2 * Phi.evaluate(g)))
    I2 = np.mean(B * (f * derivative(Psi).evaluate(f) - 2 * Psi.evaluate(f)))
    t0, v0 = coords.tn(0), coords.vn(0)
    return complex((2 * t0 * v0 - t0 ** 2 + I1 + I2) / 4), tail


def log_tau_direct(
    pair: UnivalentPair,
    coords: CoordinateVector,
    grid: int = 256,
    method: str = "auto",
) -> complex:
    """Direct-chart free energy.

    The quadrature form evaluates ``Phi(g(w))`` and ``Psi(f(w))`` on the
    circle, which needs the ``v``-series to converge there. When the tail
    monitor fails (e.g. discs with ``|a| >= 0.5``) ``"auto"`` falls back to
    the termwise residue sum, which is the same expression integrated
    coefficient by coefficient.
    """
    if method == "sum":
        return log_tau_sum(coords)
    val, tail = _direct_quadrature(pair, coords, grid)
    if method == "quadrature":
        if tail > TAIL_TOL * max(1.0, abs(val)):
            raise TailDivergence(f"potential series tail {tail:.2e} on the circle")
        return val
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    if tail > TAIL_TOL * max(1.0, abs(val)):
        return log_tau_sum(coords)
    return val


def log_tau_extended(pair: UnivalentPair, coords: CoordinateVector, grid: int = 256, method: str = "auto") -> float:
    """Real free energy on free pairs: the direct expression plus its conjugate."""
    return float(2 * np.real(log_tau_direct(pair, coords, grid, method)))


def hessian_pattern(G: GrunskyMatrix, indices) -> np.ndarray:
    """``-|mn| b_mn``, ``|m| b_m0`` and ``-2 b_00`` laid out over ``indices``."""
    idx = list(indices)
    H = np.zeros((len(idx), len(idx)), complex)
    for i, m in enumerate(idx):
        for j, n in enumerate(idx):
            if m == 0 and n == 0:
                H[i, j] = -2 * G[0, 0]
            elif n == 0:
                H[i, j] = abs(m) * G[m, 0]
            elif m == 0:
                H[i, j] = abs(n) * G[0, n]
            else:
                H[i, j] = -abs(m * n) * G[m, n]
    return H


@dataclass
class FreeEnergyRecord:
    chart: str
    log_tau: complex
    indices: list = field(default_factory=list)
    gradient: np.ndarray | None = None
    hessian: np.ndarray | None = None

    def __post_init__(self):
        if self.chart == "extended" and abs(np.imag(self.log_tau)) > 1e-10:
            raise ValueError("extended-chart free energy must be real")

    def to_json(self) -> dict:
        out = {
            "chart": self.chart,
            "log_tau": [float(np.real(self.log_tau)), float(np.imag(self.log_tau))],
            "indices": [int(k) for k in self.indices],
        }
        if self.gradient is not None:
            out["gradient"] = {"re": np.real(self.gradient).tolist(), "im": np.imag(self.gradient).tolist()}
        if self.hessian is not None:
            out["hessian"] = {"re": np.real(self.hessian).tolist(), "im": np.imag(self.hessian).tolist()}
        return out
