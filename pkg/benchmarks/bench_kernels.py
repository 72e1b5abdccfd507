"""Time the compiled and numpy skew-normal cdf kernels on the same inputs.

Run with ``python3 benchmarks/bench_kernels.py [--n 2000] [--repeat 5]``.
"""
import argparse
import timeit

import numpy as np

from stein_bounds import _kernels_py

try:
    from stein_bounds import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=2000, help="points per call")
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    z = rng.normal(0.0, 2.0, size=args.n)
    backends = {"python": _kernels_py}
    if _kernels_c is not None:
        backends["cython"] = _kernels_c
    else:
        print("cython extension not built; timing the numpy fallback only")

    print(f"{'lambda':>8} {'backend':>8} {'best s':>10} {'us/point':>10} {'max |diff|':>12}")
    for lam in (0.5, 2.0, 20.0, -5.0):
        ref = _kernels_py.skewnorm_cdf_std(z, lam)
        for name, mod in backends.items():
            best = min(timeit.repeat(lambda: mod.skewnorm_cdf_std(z, lam), number=1, repeat=args.repeat))
            diff = np.max(np.abs(mod.skewnorm_cdf_std(z, lam) - ref))
            print(f"{lam:>8g} {name:>8} {best:>10.4f} {1e6 * best / args.n:>10.2f} {diff:>12.2e}")


if __name__ == "__main__":
    main()
