"""Independent reference computations used by the test suite."""

import numpy as np
from scipy.signal import convolve2d


def _trunc_mul(a, b, d):
    return convolve2d(a, b)[: d + 1, : d + 1]


def _log1p_2d(U, d):
    # U has zero constant term, so U^k only has total degree >= k
    out = np.zeros_like(U)
    term = np.zeros_like(U)
    term[0, 0] = 1.0
    for k in range(1, 2 * d + 1):
        term = _trunc_mul(term, U, d)
        out += (-1) ** (k + 1) * term / k
    return out


def grunsky_bivariate(a, bs, d):
    """Grunsky coefficients from direct bivariate expansion of the three log kernels.

    ``f(z) = sum a[k-1] z^k``, ``g(z) = z/a[0] + sum bs[k] z^-k``. Returns a dict
    ``{(m, n): b_mn}`` for ``|m|, |n| <= d``.
    """
    a = np.asarray(a, complex)
    bs = np.asarray(bs, complex)
    b = 1 / a[0]
    out = {}

    # (g(z) - g(w)) / (z - w) in x = 1/z, y = 1/w
    U = np.zeros((d + 1, d + 1), complex)
    for k in range(1, len(bs)):
        for j in range(k):
            if k - j <= d and 1 + j <= d:
                U[k - j, 1 + j] -= bs[k]
    L = _log1p_2d(U / b, d)
    for m in range(1, d + 1):
        for n in range(1, d + 1):
            out[m, n] = -L[m, n]

    # (g(z) - f(w)) / z in x = 1/z, y = w
    V = np.zeros((d + 1, d + 1), complex)
    for k in range(len(bs)):
        if k + 1 <= d:
            V[k + 1, 0] += bs[k]
    for k in range(1, len(a) + 1):
        if k <= d:
            V[1, k] -= a[k - 1]
    L = _log1p_2d(V / b, d)
    for m in range(1, d + 1):
        for n in range(0, d + 1):
            out[m, -n] = -L[m, n]
            out[-n, m] = -L[m, n]

    # (f(z) - f(w)) / (z - w) in z, w
    W = np.zeros((d + 1, d + 1), complex)
    for k in range(1, len(a) + 1):
        for j in range(k):
            if j <= d and k - 1 - j <= d:
                W[j, k - 1 - j] += a[k - 1]
    c = W[0, 0]
    W[0, 0] = 0
    L = _log1p_2d(W / c, d)
    L[0, 0] += np.log(c)
    for m in range(0, d + 1):
        for n in range(0, d + 1):
            if (m, n) != (0, 0):
                out[-m, -n] = -L[m, n]
    out[0, 0] = np.log(b)
    return out


def mobius_pair_coeffs(a, alpha, order):
    """Coefficients of the closed-form welding pair for ``gamma = e^{-i alpha}(z + conj a)/(1 + a z)``."""
    s = np.sqrt(1 - abs(a) ** 2)
    b = np.exp(0.5j * alpha) / s
    c = -np.conj(a) * np.exp(-0.5j * alpha) / s
    f = [(1 / b) * (-a) ** k for k in range(order)]
    return f, [c], b


def mobius_inverse_coords(a, alpha):
    """Closed-form inverse-chart values; ``log t0`` taken as ``-2 log b`` with principal ``log b``."""
    s2 = 1 - abs(a) ** 2
    b = np.exp(0.5j * alpha) / np.sqrt(s2)
    t1, t0, tm1 = -a, np.exp(-1j * alpha) * s2, -np.conj(a) * np.exp(-1j * alpha)
    log_t0 = -2 * np.log(b)
    v = lambda n: np.exp(-1j * (n + 1) * alpha) * s2 * np.conj(a) ** n
    vm = lambda n: (-1) ** (n - 1) * np.exp(-1j * alpha) * a ** n * s2
    v0 = t0 * log_t0 - t0 - t1 * tm1
    log_tau = t0 ** 2 / 2 * log_t0 - 0.75 * t0 ** 2 - t0 * t1 * tm1
    return dict(t1=t1, t0=t0, tm1=tm1, v=v, vm=vm, v0=v0, log_t0=log_t0, log_tau=log_tau)


def mobius_direct_coords(a, alpha):
    s = np.sqrt(1 - abs(a) ** 2)
    b = np.exp(0.5j * alpha) / s
    c = -np.conj(a) * np.exp(-0.5j * alpha) / s
    t1, t0, tm1 = a * b, b ** 2, -c
    log_t0 = 2 * np.log(b)
    v = lambda n: b ** 2 * c ** n
    vm = lambda n: -(a ** n) * b ** (n + 2)
    v0 = t0 * log_t0 - t0 - t1 * tm1
    log_tau = t0 ** 2 / 2 * log_t0 - 0.75 * t0 ** 2 - t0 * t1 * tm1
    return dict(t1=t1, t0=t0, tm1=tm1, v=v, vm=vm, v0=v0, log_t0=log_t0, log_tau=log_tau)
