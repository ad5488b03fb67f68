"""Truncated Laurent series over the complex numbers, plus circle sampling.

A :class:`TruncatedSeries` keeps the coefficients of ``z**k`` for
``-order <= k <= order`` in a dense array.  Every operation re-truncates to
that window.  Series are used in one of two formal senses:

* expansions at the origin (``at="zero"``): finitely many negative powers,
  a tail of positive powers cut at ``+order``;
* expansions at infinity (``at="inf"``): finitely many positive powers,
  a tail of negative powers cut at ``-order``.

Reciprocals, composition and reversion need to know which one is meant, so
those functions take an explicit ``at`` argument.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

DEFAULT_ORDER = 16
DEFAULT_GRID = 256
LOSS_THRESHOLD = 1e-13


class SeriesError(ValueError):
    pass


class IncompatibleValuation(SeriesError):
    pass


class SingularLeadingCoefficient(SeriesError):
    pass


class NonUnitInput(SeriesError):
    pass


class GridTooSmall(SeriesError):
    pass


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    """Coefficients ``coeffs[k + order]`` of ``z**k`` for ``|k| <= order``."""

    coeffs: np.ndarray
    order: int
    lossy: bool = field(default=False, compare=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (2 * self.order + 1,):
            raise SeriesError(f"expected {2 * self.order + 1} coefficients, got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise SeriesError("non-finite coefficient")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    # -- construction -------------------------------------------------
    @classmethod
    def zeros(cls, order: int) -> "TruncatedSeries":
        return cls(np.zeros(2 * order + 1, complex), order)

    @classmethod
    def from_dict(cls, terms: Mapping[int, complex], order: int) -> "TruncatedSeries":
        c = np.zeros(2 * order + 1, complex)
        for k, v in terms.items():
            if abs(k) <= order:
                c[k + order] += v
        return cls(c, order)

    @classmethod
    def monomial(cls, k: int, order: int, coef: complex = 1.0) -> "TruncatedSeries":
        return cls.from_dict({k: coef}, order)

    @classmethod
    def constant(cls, value: complex, order: int) -> "TruncatedSeries":
        return cls.from_dict({0: value}, order)

    @classmethod
    def from_range(cls, start: int, values: Iterable[complex], order: int) -> "TruncatedSeries":
        """Series whose coefficients from exponent ``start`` upward are ``values``."""
        return cls.from_dict({start + i: v for i, v in enumerate(values)}, order)

    # -- inspection -------------------------------------------------------
    def __getitem__(self, k: int) -> complex:
        if abs(k) > self.order:
            return 0j
        return complex(self.coeffs[k + self.order])

    def exponents(self) -> np.ndarray:
        return np.arange(-self.order, self.order + 1)

    def support(self, tol: float = 0.0) -> np.ndarray:
        return self.exponents()[np.abs(self.coeffs) > tol]

    @property
    def n_min(self) -> int:
        s = self.support()
        return int(s[0]) if s.size else 0

    @property
    def n_max(self) -> int:
        s = self.support()
        return int(s[-1]) if s.size else 0

    def norm(self) -> float:
        return float(np.sum(np.abs(self.coeffs)))

    def coefficients(self, start: int, stop: int) -> np.ndarray:
        """Coefficients for exponents ``start..stop`` inclusive (zero outside the window)."""
        return np.array([self[k] for k in range(start, stop + 1)], dtype=complex)

    def __repr__(self):
        terms = ", ".join(f"{k}: {self[k]:.6g}" for k in self.support(1e-300))
        return f"TruncatedSeries({{{terms}}}, order={self.order})"

    # -- arithmetic -------------------------------------------------------
    def _lift(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            if other.order != self.order:
                raise SeriesError(f"order mismatch {self.order} vs {other.order}")
            return other
        return TruncatedSeries.constant(complex(other), self.order)

    def __add__(self, other):
        o = self._lift(other)
        return TruncatedSeries(self.coeffs + o.coeffs, self.order, self.lossy or o.lossy)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(-self.coeffs, self.order, self.lossy)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return mul(self, other)
        return TruncatedSeries(self.coeffs * complex(other), self.order, self.lossy)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            raise SeriesError("use reciprocal(..., at=...) for series division")
        return self * (1.0 / complex(other))

    def shift(self, k: int) -> "TruncatedSeries":
        """Multiply by ``z**k``."""
        c = np.zeros_like(self.coeffs)
        n = self.order
        src = np.arange(-n, n + 1)
        dst = src + k
        keep = np.abs(dst) <= n
        c[dst[keep] + n] = self.coeffs[src[keep] + n]
        lost = float(np.sum(np.abs(self.coeffs[~keep])))
        return TruncatedSeries(c, n, self.lossy or lost > LOSS_THRESHOLD * max(self.norm(), 1e-300))

    def conj_reflect(self) -> "TruncatedSeries":
        """The series of ``conj(A(1/conj(z)))``; on the unit circle this is ``conj(A)``."""
        return TruncatedSeries(np.conj(self.coeffs[::-1]), self.order, self.lossy)

    def with_order(self, order: int) -> "TruncatedSeries":
        """Re-embed into a window of a different size (extra coefficients zero)."""
        d = {int(k): self[int(k)] for k in self.support()}
        return TruncatedSeries.from_dict(d, order)

    def evaluate(self, z) -> np.ndarray:
        """Pointwise value of the truncated sum at ``z`` (any shape, nonzero if negative powers present)."""
        z = np.asarray(z, dtype=complex)
        ks = self.support()
        if ks.size == 0:
            return np.zeros_like(z)
        c = self.coeffs[ks + self.order]
        if z.size <= 16:
            # few points, many calls (per-node Newton): one vectorized power table
            flat = z.reshape(-1, 1)
            return (flat ** ks[None, :] @ c).reshape(z.shape)
        # Horner over the nonnegative and negative parts separately
        lo, hi = int(ks[0]), int(ks[-1])
        out = np.zeros_like(z)
        for k in range(hi, max(lo, 0) - 1, -1):
            out = out * z + self.coeffs[k + self.order]
        if max(lo, 0) > 0:
            out = out * z ** max(lo, 0)
        if lo < 0:
            iz = 1.0 / z
            neg = np.zeros_like(z)
            for k in range(lo, min(hi, -1) + 1):
                neg = neg * iz + self.coeffs[k + self.order]
            out = out + neg * iz ** -min(hi, -1)
        return out

    __call__ = evaluate

    def allclose(self, other: "TruncatedSeries", atol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.coeffs - self._lift(other).coeffs)) <= atol)


def mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product truncated to ``[-N, N]``; ``lossy`` records discarded mass."""
    b = a._lift(b)
    n = a.order
    full = np.convolve(a.coeffs, b.coeffs)  # exponents -2n .. 2n
    kept = full[n:3 * n + 1]
    lost = float(np.sum(np.abs(full[:n])) + np.sum(np.abs(full[3 * n + 1:])))
    scale = max(a.norm() * b.norm(), 1e-300)
    return TruncatedSeries(kept, n, a.lossy or b.lossy or lost > LOSS_THRESHOLD * scale)


def derivative(a: TruncatedSeries) -> TruncatedSeries:
    k = a.exponents()
    d = np.zeros_like(a.coeffs)
    d[:-1] = (k[1:] * a.coeffs[1:])
    return TruncatedSeries(d, a.order, a.lossy)


def project(a: TruncatedSeries, part: str) -> TruncatedSeries:
    """Keep exponents in ``pos`` (>0), ``neg`` (<0), ``zero``, ``geq0`` or ``leq0``."""
    k = a.exponents()
    masks = {
        "pos": k > 0,
        "neg": k < 0,
        "zero": k == 0,
        "geq0": k >= 0,
        "leq0": k <= 0,
    }
    if part not in masks:
        raise SeriesError(f"unknown part {part!r}")
    return TruncatedSeries(np.where(masks[part], a.coeffs, 0), a.order, a.lossy)


def _split_unit(a: TruncatedSeries, at: str):
    """Write ``a = c * z**v * (1 + u)`` with ``u`` one-sided in the direction of ``at``."""
    s = a.support()
    if s.size == 0:
        raise SingularLeadingCoefficient("zero series")
    if at == "zero":
        v = int(s[0])
    elif at == "inf":
        v = int(s[-1])
    else:
        raise SeriesError(f"at must be 'zero' or 'inf', got {at!r}")
    c = a[v]
    if abs(c) < 1e-12:
        raise SingularLeadingCoefficient(f"leading coefficient {c!r} too small")
    u = a.shift(-v) * (1.0 / c) - 1.0
    u = TruncatedSeries(np.where(a.exponents() == 0, 0.0, u.coeffs), a.order, u.lossy)
    return c, v, u


def reciprocal(a: TruncatedSeries, at: str) -> TruncatedSeries:
    """``1/a`` as a formal expansion at ``at`` (``"zero"`` or ``"inf"``).

    Uses the recursion ``r_j = -sum_{i=1..j} e_i r_{j-i}`` for ``1/(1 + u)``,
    which stays stable where summing powers of ``u`` cancels catastrophically.
    """
    c, v, u = _split_unit(a, at)
    n = a.order
    L = 2 * n + 1
    # coefficients of 1 + u along the expansion direction
    e = u.coeffs[n:] if at == "zero" else u.coeffs[: n + 1][::-1]
    e = np.concatenate([e, np.zeros(L - e.size, complex)])
    r = np.zeros(L, complex)
    r[0] = 1.0
    for j in range(1, L):
        r[j] = -np.dot(e[1 : j + 1], r[j - 1 :: -1])
    # r_j multiplies z^(j - v) at zero and z^(-j - v) at infinity
    ks = np.arange(L)
    expo = ks - v if at == "zero" else -ks - v
    keep = np.abs(expo) <= n
    out = np.zeros(L, complex)
    out[expo[keep] + n] = r[keep] / c
    return TruncatedSeries(out, n)


def power(a: TruncatedSeries, k: int, at: str) -> TruncatedSeries:
    if k == 0:
        return TruncatedSeries.constant(1.0, a.order)
    base = a if k > 0 else reciprocal(a, at)
    out = base
    for _ in range(abs(k) - 1):
        out = out * base
    return out


def _check_inner(b: TruncatedSeries, at: str):
    s = b.support()
    if s.size == 0:
        raise IncompatibleValuation("composition with the zero series")
    if at == "zero" and (s[0] != 1):
        raise IncompatibleValuation(f"inner series must start at z^1 for expansion at 0, starts at z^{s[0]}")
    if at == "inf" and (s[-1] != 1):
        raise IncompatibleValuation(f"inner series must end at z^1 for expansion at infinity, ends at z^{s[-1]}")
    if abs(b[1]) < 1e-12:
        raise SingularLeadingCoefficient("inner series has vanishing linear coefficient")


def compose(a: TruncatedSeries, b: TruncatedSeries, at: str | None = None,
            method: str = "coeff", grid: int | None = None) -> TruncatedSeries:
    """Coefficients of ``a(b(z))``.

    ``method="coeff"`` accumulates powers of ``b`` (formal, exact up to the
    window).  ``method="grid"`` samples ``b`` on the unit circle, evaluates
    ``a`` there and refits; this requires both functions to be regular on the
    circle and the composite to be band-limited to the window.
    """
    b = a._lift(b)
    if at is None:
        at = "zero" if b.n_min == 1 else "inf"
    if method == "grid":
        m = grid or max(DEFAULT_GRID, 4 * (a.order + 1))
        w = circle_nodes(m)
        bw = b.evaluate(w)
        if a.n_min < 0 and np.min(np.abs(bw)) < 1e-12 * max(np.max(np.abs(bw)), 1.0):
            raise IncompatibleValuation("inner series vanishes on the evaluation circle")
        return fourier(CircleGrid(a.evaluate(bw)), a.order)
    if method != "coeff":
        raise SeriesError(f"unknown method {method!r}")
    _check_inner(b, at)
    n = a.order
    out = TruncatedSeries.constant(a[0], n)
    kmax = a.n_max
    kmin = a.n_min
    if kmax > 0:
        p = b
        for k in range(1, kmax + 1):
            if k > 1:
                p = p * b
            if a[k] != 0:
                out = out + p * a[k]
    if kmin < 0:
        r = reciprocal(b, at)
        p = r
        for k in range(1, -kmin + 1):
            if k > 1:
                p = p * r
            if a[-k] != 0:
                out = out + p * a[-k]
    return out


def identity(order: int) -> TruncatedSeries:
    return TruncatedSeries.monomial(1, order)


INVERSE_RADII = (1.0, 1.05, 1.1, 1.2, 1.35)
QUIET_RUN = 8


def _winds_once(v: np.ndarray) -> bool:
    if np.min(np.abs(v)) == 0:
        return False
    return abs(np.sum(np.angle(np.roll(v, -1) / v)) / (2 * np.pi) - 1) < 1e-6


def _inverse_contour(a: TruncatedSeries, at: str, grid: int | None) -> TruncatedSeries:
    """Lagrange inversion by quadrature.

    The inverse's coefficient of ``zeta^k`` is ``(1/2 pi i) oint z a'(z) a(z)^(-k-1) dz``
    over any circle on which ``a`` is still univalent. Radii ``rho`` (``1/rho``
    at infinity) are admissible when the truncation tail is negligible there
    and both ``a`` and ``z a'`` wind once around 0. Each coefficient is taken
    from the radius with the smallest roundoff floor ``eps * max|integrand|``;
    coefficients below that floor are zero, and a run of QUIET_RUN of them ends the expansion.
    """
    n = a.order
    m = grid or max(DEFAULT_GRID, 4 * (n + 1))
    w = circle_nodes(m)
    da = derivative(a)
    ks = np.arange(1, -n - 1, -1) if at == "inf" else np.arange(1, n + 1)
    eps = np.finfo(float).eps
    circles = []
    for rho in INVERSE_RADII:
        r = 1 / rho if at == "inf" else rho
        if rho != 1.0:
            tail = abs(a[-n]) * r ** -n if at == "inf" else abs(a[n]) * r ** n
            if tail > 1e-14 * abs(a[1]):
                break
        z = r * w
        A, dA = a.evaluate(z), da.evaluate(z)
        if not (_winds_once(A) and _winds_once(z * dA)):
            if rho == 1.0:
                raise SeriesError("series is not univalent up to the unit circle")
            break
        circles.append((z * z * dA, A))
    out = np.zeros(2 * n + 1, complex)
    quiet = 0
    for k in ks:
        best, floor = 0j, np.inf
        for base, A in circles:
            h = base * A ** (-k - 1)
            fl = 10 * eps * np.max(np.abs(h))
            if fl < floor:
                best, floor = np.mean(h), fl
        if k not in (0, 1) and abs(best) < floor:
            # symmetric maps have exact zeros; only a run of them marks the floor
            quiet += 1
            if quiet >= QUIET_RUN:
                break
            continue
        quiet = 0
        out[k + n] = best
    return TruncatedSeries(out, n)


def comp_inverse(a: TruncatedSeries, at: str, tol: float = 1e-14, max_iter: int = 50,
                 method: str = "newton", grid: int | None = None) -> TruncatedSeries:
    """Compositional inverse.

    ``at="zero"``: ``a = a1 z + a2 z^2 + ...``; ``at="inf"``:
    ``a = b z + b0 + b1/z + ...``. ``method="newton"`` iterates on
    coefficients (formal, exact for any input but it loses accuracy in high
    coefficients of slowly convergent maps); ``method="contour"`` uses
    Lagrange inversion by quadrature and needs ``a`` univalent up to the unit
    circle.
    """
    if method == "contour":
        if at not in ("zero", "inf"):
            raise SeriesError(f"at must be 'zero' or 'inf', got {at!r}")
        return _inverse_contour(a, at, grid)
    if method != "newton":
        raise SeriesError(f"unknown method {method!r}")
    n = a.order
    lead = a[1]
    if abs(lead) < 1e-12:
        raise SingularLeadingCoefficient(f"linear coefficient {lead!r} too small")
    if at == "zero":
        if a[0] != 0 or np.any(a.coeffs[:n]):
            raise IncompatibleValuation("series at 0 must have no constant or negative terms")
        inv = TruncatedSeries.monomial(1, n, 1.0 / lead)
    elif at == "inf":
        if np.any(a.coeffs[n + 2:]):
            raise IncompatibleValuation("series at infinity must have no powers above z")
        inv = TruncatedSeries.from_dict({1: 1.0 / lead, 0: -a[0] / lead}, n)
    else:
        raise SeriesError(f"at must be 'zero' or 'inf', got {at!r}")
    z = identity(n)
    da = derivative(a)
    for _ in range(max_iter):
        resid = compose(a, inv, at) - z
        step = mul(resid, reciprocal(compose(da, inv, at), at))
        inv = inv - step
        if np.max(np.abs(step.coeffs)) < tol:
            break
    return TruncatedSeries(inv.coeffs, n)


def log_unit(a: TruncatedSeries) -> TruncatedSeries:
    """``log a`` for ``a = c (1 + u)``, ``u`` strictly one-sided.

    The constant is the principal ``log c``; the rest is the branch-free
    series ``log(1 + u)``, built from ``z d/dz log(1+u) = z u' / (1 + u)``.
    """
    c = a[0]
    if abs(c) < 1e-300:
        raise NonUnitInput("constant term vanishes")
    u = a * (1.0 / c) - 1.0
    # c/c - 1 can round to a few ulps; it is zero by construction
    u = TruncatedSeries(np.where(a.exponents() == 0, 0.0, u.coeffs), a.order, u.lossy)
    s = u.support(0.0)
    if s.size and s[0] < 0 < s[-1]:
        raise NonUnitInput("1 + u must be one-sided (all exponents of u of one sign)")
    if s.size == 0:
        return TruncatedSeries.constant(np.log(c), a.order)
    at = "zero" if s[0] > 0 else "inf"
    zd = TruncatedSeries(a.exponents() * u.coeffs, a.order)
    q = zd * reciprocal(u + 1.0, at)
    k = a.exponents()
    out = np.zeros_like(q.coeffs)
    nz = k != 0
    out[nz] = q.coeffs[nz] / k[nz]
    out[a.order] = np.log(c)
    return TruncatedSeries(out, a.order, q.lossy)


# -- circle sampling --------------------------------------------------------

def circle_nodes(m: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(m) / m)


@dataclass(frozen=True, eq=False)
class CircleGrid:
    """Values at the nodes ``exp(2 pi i k / M)``."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        object.__setattr__(self, "samples", s)

    @property
    def M(self) -> int:
        return self.samples.shape[0]

    @property
    def nodes(self) -> np.ndarray:
        return circle_nodes(self.M)


def check_grid(m: int, order: int) -> None:
    if m & (m - 1) or m < 4 * (order + 1):
        raise GridTooSmall(f"grid M={m} must be a power of two >= 4(N+1) = {4 * (order + 1)}")


def sample(a: TruncatedSeries, m: int) -> CircleGrid:
    """Samples of ``a`` on the M-point circle grid (via FFT)."""
    eff = int(max(abs(a.n_min), abs(a.n_max)))
    check_grid(m, eff)
    buf = np.zeros(m, complex)
    for k in a.support():
        buf[int(k) % m] += a[int(k)]
    return CircleGrid(np.fft.ifft(buf) * m)


def fourier(g: CircleGrid, window: int) -> TruncatedSeries:
    """Fourier coefficients ``c_k``, ``|k| <= window``, of circle samples."""
    m = g.M
    if 2 * window + 1 > m:
        raise GridTooSmall(f"window {window} needs at least {2 * window + 1} samples")
    spec = np.fft.fft(g.samples) / m
    k = np.arange(-window, window + 1)
    return TruncatedSeries(spec[k % m], window)


def contour_integral(values: np.ndarray) -> complex:
    """``(1/2 pi i) \\oint h(w) dw`` on the unit circle from node values of ``h``.

    Trapezoid rule: ``dw = i w dtheta``, so the integral is ``mean(h(w) w)``.
    """
    m = values.shape[-1]
    return complex(np.mean(values * circle_nodes(m), axis=-1))
