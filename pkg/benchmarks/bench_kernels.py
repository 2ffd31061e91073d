"""Compiled kernels against the numpy fallback.

Times each kernel on identical inputs, reports the largest difference
between the two backends, and times one end-to-end table-heavy workload
(standardized simulation) under each backend in a subprocess.

    python benchmarks/bench_kernels.py [--n 200000] [--repeat 5] [--paths 5000]
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from qharness import _fallback

try:
    from qharness import _kernels
except ImportError:
    _kernels = None


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(n, rng):
    z = rng.uniform(-8, 12, n) + 1j * rng.uniform(-30, 30, n)
    params = (rng.uniform(0.05, 3, (n, 4)) + 1j * rng.uniform(-3, 3, (n, 4))).astype(np.complex128)
    y = rng.uniform(0, 20, n)
    x = rng.uniform(1e-6, 50, n)
    return {
        "loggamma": (z,),
        "sum_log_abs_gamma_sq": (params, y),
        "log_weight": (x,),
    }


END_TO_END = (
    "import time; from qharness import processes as P, sampler as S;"
    "f = P.FourParam(.5+1j, .5-1j, .5+.5j, .5-.5j);"
    "t0 = time.perf_counter();"
    "S.simulate_standardized(f, [0.5, 1.0, 1.5], {paths}, S.RngHandle(1));"
    "print(time.perf_counter() - t0)"
)


def end_to_end(paths, pure):
    env = dict(os.environ, QHARNESS_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", END_TO_END.format(paths=paths)], env=env,
                         capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--paths", type=int, default=5_000)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; run `python setup.py build_ext --inplace`")
        return 1
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'compiled (s)':>14}{'python (s)':>14}{'speedup':>10}{'max diff':>12}")
    for name, inputs in cases(args.n, rng).items():
        fc, fp = getattr(_kernels, name), getattr(_fallback, name)
        tc = best_time(lambda: fc(*inputs), args.repeat)
        tp = best_time(lambda: fp(*inputs), args.repeat)
        diff = np.max(np.abs(fc(*inputs) - fp(*inputs)))
        print(f"{name:<22}{tc:>14.4f}{tp:>14.4f}{tp / tc:>10.1f}{diff:>12.2e}")
    tc = end_to_end(args.paths, pure=False)
    tp = end_to_end(args.paths, pure=True)
    print(f"{'simulate (' + str(args.paths) + ' paths)':<22}{tc:>14.2f}{tp:>14.2f}{tp / tc:>10.1f}{'':>12}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
