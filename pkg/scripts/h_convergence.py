"""Lax and string residuals against the FD step, showing the h^2 regime and its edges."""

from dtoda.families import HomeoFamily, PairFamily
from dtoda.toda import lax_residual, string_residual
from dtoda.welding import CircleHomeo, weld

STEPS = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 5e-4, 2.5e-4, 1e-4]


def safe(fn, h):
    try:
        return fn(h)
    except (ArithmeticError, RuntimeError):
        return float("inf")


def main():
    gamma = CircleHomeo.perturbed_mobius(0.3, 0.4, {2: 0.01, 3: -0.01j})
    fams = {
        "inverse": HomeoFamily(gamma),
        "extended": PairFamily(weld(CircleHomeo.perturbed_mobius(0.2, 0.4, {2: 0.01, 3: -0.005j})).pair),
    }
    print("family,check,h,residual")
    for name, fam in fams.items():
        for h in STEPS:
            for n in (1, -1, 2, -2):
                print(f"{name},lax{n:+d},{h:g},{safe(lambda s: lax_residual(fam, n, s), h):.3e}", flush=True)
            print(f"{name},string,{h:g},{safe(lambda s: string_residual(fam, s), h):.3e}", flush=True)


if __name__ == "__main__":
    main()
