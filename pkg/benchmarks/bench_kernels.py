"""Benchmark the jit kernels against the pure-numpy fallback.

Runs each kernel on identical inputs over a range of sizes and prints a
throughput table. The first jit call is excluded from timing (compilation).

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from egosocial import _kernels

N_REPEAT = 20
TRACK_SIZES = (1_000, 10_000, 100_000)
WINDOWS = (5, 9)


def bench(func, *args):
    func(*args)  # warm (jit compile / cache touch)
    times = []
    for _ in range(N_REPEAT):
        start = time.perf_counter()
        func(*args)
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    rng = np.random.default_rng(0)
    if not _kernels.USING_NUMBA and _kernels.median_window_jit is None:
        print("numba unavailable or disabled; benchmarking numpy path only")

    print(f"{'kernel':<28} {'size':>8} {'numpy':>12} {'numba':>12} {'speedup':>8}")
    for n in TRACK_SIZES:
        scores = rng.random(n)
        for window in WINDOWS:
            t_np = bench(_kernels.median_window_numpy, scores, window)
            row = f"{'median_window (w=%d)' % window:<28} {n:>8}"
            if _kernels.median_window_jit is not None:
                t_jit = bench(_kernels.median_window_jit, scores, window)
                print(f"{row} {t_np * 1e3:>10.3f}ms {t_jit * 1e3:>10.3f}ms {t_np / t_jit:>7.1f}x")
            else:
                print(f"{row} {t_np * 1e3:>10.3f}ms {'-':>12} {'-':>8}")

    for n in TRACK_SIZES:
        labels = (rng.random(n) < 0.3).astype(np.float64)
        t_np = bench(_kernels.ap_ranked_numpy, labels)
        row = f"{'ap_ranked':<28} {n:>8}"
        if _kernels.ap_ranked_jit is not None:
            t_jit = bench(_kernels.ap_ranked_jit, labels)
            print(f"{row} {t_np * 1e3:>10.3f}ms {t_jit * 1e3:>10.3f}ms {t_np / t_jit:>7.1f}x")
        else:
            print(f"{row} {t_np * 1e3:>10.3f}ms {'-':>12} {'-':>8}")


if __name__ == "__main__":
    main()
