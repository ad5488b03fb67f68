"""Errors of both charts and log tau against the Möbius closed forms, as CSV on stdout."""

import sys

import numpy as np

from dtoda.coords import direct_chart, inverse_chart
from dtoda.tau import log_tau_direct, log_tau_inverse
from dtoda.welding import CircleHomeo, MobiusParams, mobius_pair


def closed_form(a, alpha):
    s2 = 1 - abs(a) ** 2
    b = np.exp(0.5j * alpha) / np.sqrt(s2)
    c = -np.conj(a) * np.exp(-0.5j * alpha) / np.sqrt(s2)
    inv = dict(t1=-a, t0=np.exp(-1j * alpha) * s2, tm1=-np.conj(a) * np.exp(-1j * alpha))
    inv["log_tau"] = inv["t0"] ** 2 / 2 * (-2 * np.log(b)) - 0.75 * inv["t0"] ** 2 - inv["t0"] * inv["t1"] * inv["tm1"]
    dr = dict(t1=a * b, t0=b ** 2, tm1=-c)
    dr["log_tau"] = dr["t0"] ** 2 / 2 * (2 * np.log(b)) - 0.75 * dr["t0"] ** 2 - dr["t0"] * dr["t1"] * dr["tm1"]
    return inv, dr


def main(order=16):
    print("a,alpha,inverse_t_err,inverse_tau_err,direct_t_err,direct_tau_err")
    for a in (0.1, 0.3, 0.5, 0.7, 0.8):
        for alpha in (0.0, np.pi / 6, np.pi / 2, np.pi):
            inv, dr = closed_form(a, alpha)
            g = CircleHomeo.mobius(a, alpha)
            ci = inverse_chart(g, order=order)
            pair = mobius_pair(MobiusParams(a, alpha), 128)
            cd = direct_chart(pair, order)
            e_inv = max(abs(ci.tn(1) - inv["t1"]), abs(ci.tn(0) - inv["t0"]), abs(ci.tn(-1) - inv["tm1"]))
            e_dir = max(abs(cd.tn(1) - dr["t1"]), abs(cd.tn(0) - dr["t0"]), abs(cd.tn(-1) - dr["tm1"]))
            tau_i = abs(log_tau_inverse(g, ci) - inv["log_tau"])
            tau_d = abs(log_tau_direct(pair, cd) - dr["log_tau"])
            print(f"{a},{alpha:.6f},{e_inv:.3e},{tau_i:.3e},{e_dir:.3e},{tau_d:.3e}")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 16)
