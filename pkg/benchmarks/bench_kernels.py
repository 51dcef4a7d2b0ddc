"""Time the compiled and NumPy finite-section kernels on the same inputs.

Run ``python3 benchmarks/bench_kernels.py``.  Prints one line per kernel
and section size with the best-of-``repeat`` time for each backend.
"""
import argparse
import timeit

import numpy as np

from freefock import _kernels_py, opnorm
from freefock.freepoly import FreePoly

try:
    from freefock import _kernels_c
except ImportError:  # extension not built
    _kernels_c = None


def _poly(n):
    rng = np.random.default_rng(0)
    terms = {(): 1.0}
    for k in range(1, 4):
        w = tuple(int(a) for a in rng.integers(1, n + 1, size=k))
        terms[w] = rng.standard_normal() + 1j * rng.standard_normal()
    return FreePoly(n, terms)


def _cases(sec):
    m = sec.shape[0]
    rng = np.random.default_rng(1)
    x = rng.standard_normal(sec.shape[1]) + 0j
    y = rng.standard_normal(m) + 0j
    return {
        "matvec": lambda impl: impl.matvec(sec.rows, sec.coefs, x, m),
        "rmatvec": lambda impl: impl.rmatvec(sec.rows, sec.coefs, y),
        "normal_matvec": lambda impl: impl.normal_matvec(sec.rows, sec.coefs, x, m),
        "power_iteration(50)": lambda impl: impl.power_iteration(sec.rows, sec.coefs, m, x, 50, 0.0),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--degrees", default="8,12,16")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _kernels_c is None:
        print("compiled kernels not built; timing the NumPy fallback only")
    print(f"{'kernel':<22}{'columns':>10}{'numpy [ms]':>13}{'cython [ms]':>13}{'speedup':>9}")
    phi = _poly(args.n)
    for N in (int(d) for d in args.degrees.split(",")):
        sec = opnorm.finite_section(phi, N)
        for name, fn in _cases(sec).items():
            t_py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat))
            if _kernels_c is None:
                print(f"{name:<22}{sec.shape[1]:>10}{1e3 * t_py:>13.3f}{'-':>13}{'-':>9}")
                continue
            t_c = min(timeit.repeat(lambda: fn(_kernels_c), number=1, repeat=args.repeat))
            print(f"{name:<22}{sec.shape[1]:>10}{1e3 * t_py:>13.3f}{1e3 * t_c:>13.3f}{t_py / t_c:>9.1f}")


if __name__ == "__main__":
    main()
