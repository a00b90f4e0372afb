#!/usr/bin/env python3
"""Time the compiled and numpy kernel backends on representative workloads.

Sizes mirror the full-scale operating point (n=4096 features grouped into
64 series, ~96 frames, 16 windows, 6 lags) and the synthetic-corpus scale
used by the test suite.
"""

import time

import numpy as np

from tscorr.kernels import available_backends


def balanced_windows(length, count):
    base, rem = divmod(length, count)
    starts, ends, pos = [], [], 0
    for i in range(count):
        width = base + (1 if i < rem else 0)
        starts.append(pos)
        ends.append(pos + width)
        pos += width
    return np.array(starts, dtype=np.int64), np.array(ends, dtype=np.int64)


def timeit(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    backends = available_backends()
    if "compiled" not in backends:
        print("compiled extension not built; timing numpy only")
    rng = np.random.default_rng(0)

    cases = [
        # (label, rows shape, windows, lags)
        ("full-scale CCF: 64 grouped rows of 64*96", (64, 64 * 96), 16, None),
        ("full-scale CCF, single window", (64, 64 * 96), 1, None),
        ("synthetic CCF: 8 rows of 8*80", (8, 8 * 80), 1, None),
        ("full-scale ACF: 4096 rows of 96 frames", (4096, 96), None, 6),
        ("synthetic ACF: 64 rows of 80 frames", (64, 80), None, 6),
    ]

    print(f"{'case':<45} " + "".join(f"{name:>12} " for name in backends))
    for label, shape, nwin, lags in cases:
        rows = rng.normal(size=shape)
        times = []
        for name, mod in backends.items():
            if nwin is not None:
                starts, ends = balanced_windows(shape[1], nwin)
                t = timeit(mod.window_pair_correlations, rows, starts, ends)
            else:
                lag_arr = np.arange(1, lags + 1, dtype=np.int64)
                t = timeit(mod.row_acf, rows, lag_arr)
            times.append(t)
        print(f"{label:<45} " + "".join(f"{t * 1e3:>10.2f}ms " for t in times))

    if "compiled" in backends:
        # cross-check on one workload: the backends must agree
        rows = rng.normal(size=(16, 512))
        starts, ends = balanced_windows(512, 4)
        a = backends["numpy"].window_pair_correlations(rows, starts, ends)
        b = backends["compiled"].window_pair_correlations(rows, starts, ends)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-12)
        print("\nbackends agree to 1e-12 on the cross-check workload")


if __name__ == "__main__":
    main()
