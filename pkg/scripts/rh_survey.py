"""Riemann-Hilbert residuals across the Möbius grid for both charts.

The direct chart is evaluated on the unit circle, where its v-series stop
converging once |a| reaches 1/2; those rows print the divergence instead.
"""

import numpy as np

from dtoda.coords import direct_chart, inverse_chart
from dtoda.tau import TailDivergence
from dtoda.toda import rh_residual
from dtoda.welding import CircleHomeo, MobiusParams, mobius_pair, weld


def main():
    print("a,alpha,chart,res1,res2,m_minus_mt")
    for a in (0.1, 0.3, 0.5, 0.7, 0.8):
        for alpha in (0.0, np.pi / 2):
            g = CircleHomeo.mobius(a, alpha)
            r = rh_residual(weld(g).pair, inverse_chart(g, order=128), gamma=g)
            print(f"{a},{alpha:.4f},inverse,{r.res1:.2e},{r.res2:.2e},{r.m_equals_mt:.2e}")
            pair = mobius_pair(MobiusParams(a, alpha), 128)
            try:
                r = rh_residual(pair, direct_chart(pair, 48))
                print(f"{a},{alpha:.4f},direct,{r.res1:.2e},{r.res2:.2e},{r.m_equals_mt:.2e}")
            except TailDivergence as e:
                print(f"{a},{alpha:.4f},direct,diverges,,{e}")


if __name__ == "__main__":
    main()
