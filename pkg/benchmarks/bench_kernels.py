"""Compare the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Both paths are called directly, so the SVANISH_NO_JIT setting does not matter
here. The last block times the full design residual through the dispatchers;
run it once normally and once with SVANISH_NO_JIT=1 to compare end to end.
"""
import argparse
import timeit

import numpy as np

from svanish import _jit, _kernels
from svanish.designer import DesignProblem, residual
from svanish.lowfreq import _dense_bessel, series_width


def _best(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def cases():
    s = DesignProblem.example1()._frame
    radii, z = np.array(s.radii), s.z
    omegas = np.linspace(0.05, 3.0, 200)
    thetas = np.linspace(0.0, np.pi, 400)
    ts = np.linspace(1e-3, 30.0, 400)
    K = series_width(1, 2, 1)
    jy = _dense_bessel(1, K)
    return {
        "jy_table(20, 400 pts)": (_kernels.jy_table_jit, _kernels.jy_table_np, (20, ts)),
        "transfer_rows(n=3, 200 omegas)": (
            _kernels.transfer_rows_jit,
            _kernels.transfer_rows_np,
            (3, _kernels.TM, omegas, radii, z, s.eps_all),
        ),
        "series_rows(n=1, order 2)": (
            _kernels.series_rows_jit,
            _kernels.series_rows_np,
            (1, _kernels.TE, K, radii, z, s.mu_all, jy[0], jy[1]),
        ),
        "legendre_table(16, 400 pts)": (_kernels.legendre_table_jit, _kernels.legendre_table_np, (16, thetas)),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if not _jit.HAVE_NUMBA:
        print("numba not installed; only the numpy path exists")
        return
    print(f"{'kernel':<34}{'numba':>12}{'numpy':>12}{'speedup':>10}")
    for name, (fj, fn, a) in cases().items():
        fj(*a)  # compile outside the timing
        tj = _best(lambda: fj(*a), args.repeat, 20)
        tn = _best(lambda: fn(*a), args.repeat, 20)
        print(f"{name:<34}{tj * 1e6:>10.1f}us{tn * 1e6:>10.1f}us{tn / tj:>9.1f}x")
    pr = DesignProblem.example1()
    residual(pr, pr.mu0, pr.eps0)
    t = _best(lambda: residual(pr, pr.mu0, pr.eps0), args.repeat, 10)
    print(f"design residual via dispatch (USE_JIT={_jit.USE_JIT}): {t * 1e3:.3f} ms")


if __name__ == "__main__":
    main()
