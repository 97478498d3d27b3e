"""Compare the numba and numpy kernel paths.

Run with ``python3 benchmarks/bench_kernels.py``. Timings are best-of-N
wall clock after one warm-up call, so numba compilation is excluded.
"""

import argparse
import timeit

import numpy as np

from fraclap import _kernels
from fraclap.quadrature import gauss_legendre_composite


def best(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--modes", type=int, default=256)
    ap.add_argument("--m", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rule = gauss_legendre_composite()
    rng = np.random.default_rng(0)
    lam = rng.standard_normal((rule.size, args.m, args.m))
    J = args.modes
    moments = _kernels.cosine_moments_numpy(rule.nodes, rule.weights, lam, 2 * J)

    cases = [
        ("cosine moments", lambda k: k(rule.nodes, rule.weights, lam, 2 * J),
         _kernels.cosine_moments_numba, _kernels.cosine_moments_numpy),
        ("galerkin fill", lambda k: k(moments, J),
         _kernels.galerkin_fill_numba, _kernels.galerkin_fill_numpy),
        ("zeta partial sum 1e6", lambda k: k(1.5, 10**6),
         _kernels.zeta_partial_sum_numba, _kernels.zeta_partial_sum_numpy),
    ]
    print(f"{'kernel':<22} {'numba [ms]':>12} {'numpy [ms]':>12} {'ratio':>8}")
    for name, call, fast, slow in cases:
        a = best(lambda: call(fast), args.repeat) * 1e3
        b = best(lambda: call(slow), args.repeat) * 1e3
        print(f"{name:<22} {a:12.3f} {b:12.3f} {b / a:8.2f}")


if __name__ == "__main__":
    main()
