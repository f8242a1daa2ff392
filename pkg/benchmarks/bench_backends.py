"""Benchmark the numba kernels against the pure-numpy fallback.

Run from the repository root:

    python benchmarks/bench_backends.py

Covers the four hot paths: Tulap cdf/quantile evaluation, hypergeometric
weight construction, the Gil-Pelaez panel sweep of the two-proportion
statistic, and the batched semi-private p-value.
"""

import math
import time

import numpy as np

from cndtest import _kernels_numpy as knp

try:
    from cndtest import _kernels_numba as knb
except ImportError:
    knb = None


def timeit(fn, repeat=5):
    fn()  # warm-up (JIT compile / cache load)
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def row(name, numpy_s, numba_s):
    if numba_s is None:
        print(f"{name:34s} numpy {numpy_s * 1e3:9.3f} ms   numba       n/a")
    else:
        print(
            f"{name:34s} numpy {numpy_s * 1e3:9.3f} ms   "
            f"numba {numba_s * 1e3:9.3f} ms   speedup {numpy_s / numba_s:6.2f}x"
        )


def main():
    rng = np.random.default_rng(0)
    b = math.exp(-0.1)

    xs = rng.uniform(-25, 25, 200_000)
    row(
        "tulap_cdf (200k points)",
        timeit(lambda: knp.tulap_cdf(xs, b, 0.01)),
        timeit(lambda: knb.tulap_cdf(xs, b, 0.01)) if knb else None,
    )

    us = rng.random(200_000)
    row(
        "tulap_quantile (200k points)",
        timeit(lambda: knp.tulap_quantile(us, b, 0.01)),
        timeit(lambda: knb.tulap_quantile(us, b, 0.01)) if knb else None,
    )

    def hyper_sweep(mod):
        def run():
            for z in range(0, 801, 5):
                mod.hyper_weights(400, 400, z, 0.3)

        return run

    row(
        "hyper_weights (m=n=400, 161 z)",
        timeit(hyper_sweep(knp)),
        timeit(hyper_sweep(knb)) if knb else None,
    )

    def gp(mod):
        return lambda: mod.gp_sweep_tstat(0.17, 0.5, 30, 30, 0, b, 2400.0, 1.8)

    row(
        "gp_sweep_tstat (eps path)",
        timeit(gp(knp)),
        timeit(gp(knb)) if knb else None,
    )

    m = n = 100
    xc = rng.integers(0, n + 1, 5000)
    yc = rng.integers(0, m + 1, 5000)
    ts = (yc - xc) + rng.normal(0, 10, 5000)
    row(
        "semiprivate_pvalues (5000 reps)",
        timeit(lambda: knp.semiprivate_pvalues(xc, yc, ts, m, n, b, 0.0)),
        timeit(lambda: knb.semiprivate_pvalues(xc, yc, ts, m, n, b, 0.0)) if knb else None,
    )

    if knb is None:
        print("\nnumba unavailable; only the numpy lane was timed")


if __name__ == "__main__":
    main()
