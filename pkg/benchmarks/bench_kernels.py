"""Compare the compiled and numpy kernels on uniform designs of increasing size.

    python3 benchmarks/bench_kernels.py [--sizes 400,1600,3200] [--repeat 5]
"""

import argparse
import sys
import timeit

import numpy as np

from isotropy import _backend
from isotropy.variogram import KERNEL_FAMILIES

LAGS = np.array([[0.75, 0.0], [0.0, 0.75], [0.75, 0.75], [-0.75, 0.75]])
ANGLES = np.array([0.0, 45.0, 90.0, 135.0])


def _case(n, seed=0):
    rng = np.random.default_rng(seed)
    side = np.sqrt(n)  # keep the density at one point per unit area
    return np.ascontiguousarray(rng.uniform(0, side, (n, 2))), rng.standard_normal(n), np.linspace(0, side / 2, 14)


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="400,1600,3200")
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if _backend.compiled_kernels is None:
        print("compiled kernels are not built; nothing to compare", file=sys.stderr)
        return 1
    impls = {"cython": _backend.compiled_kernels, "python": _backend.python_kernels}
    gauss = KERNEL_FAMILIES["gaussian"]
    print(f"{'kernel':<12}{'n':>7}{'cython (ms)':>14}{'python (ms)':>14}{'speedup':>10}")
    for n in (int(s) for s in args.sizes.split(",")):
        locs, vals, edges = _case(n)
        rows = {
            "smoother": lambda m: m.kernel_sums(locs, vals, LAGS, gauss, 0.7, 1.5),
            "directional": lambda m: m.directional_sums(locs, vals, ANGLES, 22.5, edges),
        }
        for name, call in rows.items():
            t = {k: _best(lambda m=m: call(m), args.repeat) for k, m in impls.items()}
            print(f"{name:<12}{n:>7}{1e3 * t['cython']:>14.2f}{1e3 * t['python']:>14.2f}{t['python'] / t['cython']:>9.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
