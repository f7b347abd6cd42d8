"""Hot numeric kernels with two interchangeable implementations.

The default path jit-compiles the loop kernels with numba; setting
EGOSOCIAL_NO_NUMBA=1 (before import) selects the vectorized pure-numpy
fallback instead, and a missing numba install falls back silently. Both
paths compute identical values (the test suite asserts exact agreement) and
benchmarks/bench_kernels.py compares their throughput.
"""

from __future__ import annotations

import os

import numpy as np


def _median_window_loop(scores, window):
    # Centered window over entry positions, truncated at the boundaries;
    # an even (truncated) count resolves to the mean of the two middles.
    n = scores.shape[0]
    out = np.empty(n, dtype=np.float64)
    half = window // 2
    buf = np.empty(window, dtype=np.float64)
    for i in range(n):
        lo = i - half
        if lo < 0:
            lo = 0
        hi = i + half + 1
        if hi > n:
            hi = n
        m = hi - lo
        for j in range(m):
            v = scores[lo + j]
            k = j
            while k > 0 and buf[k - 1] > v:
                buf[k] = buf[k - 1]
                k -= 1
            buf[k] = v
        mid = m // 2
        if m % 2 == 1:
            out[i] = buf[mid]
        else:
            out[i] = (buf[mid - 1] + buf[mid]) / 2.0
    return out


def median_window_numpy(scores, window):
    scores = np.ascontiguousarray(scores, dtype=np.float64)
    n = scores.shape[0]
    if n == 0 or window == 1 or n == 1:
        return scores.copy()
    half = window // 2
    out = np.empty(n, dtype=np.float64)
    if n >= window:
        views = np.lib.stride_tricks.sliding_window_view(scores, window)
        out[half:n - half] = np.median(views, axis=1)
        for i in range(half):
            out[i] = np.median(scores[0:i + half + 1])
        for i in range(n - half, n):
            out[i] = np.median(scores[i - half:n])
    else:
        for i in range(n):
            out[i] = np.median(scores[max(0, i - half):min(n, i + half + 1)])
    return out


def _ap_ranked_loop(labels):
    # labels already ordered by rank (best first); returns -1.0 when there
    # are no positives so callers can pre-check without exceptions in jit.
    n = labels.shape[0]
    positives = 0
    acc = 0.0
    for k in range(n):
        if labels[k] > 0.0:
            positives += 1
            acc += positives / (k + 1.0)
    if positives == 0:
        return -1.0
    return acc / positives


def ap_ranked_numpy(labels):
    labels = np.ascontiguousarray(labels, dtype=np.float64)
    if labels.size == 0:
        return -1.0
    cum = np.cumsum(labels)
    total = cum[-1]
    if total <= 0.0:
        return -1.0
    pos = np.nonzero(labels > 0.0)[0]
    return float(np.sum(cum[pos] / (pos + 1.0)) / total)


_DISABLED = os.environ.get("EGOSOCIAL_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}

USING_NUMBA = False
median_window_jit = None
ap_ranked_jit = None

if not _DISABLED:
    try:
        from numba import njit
    except ImportError:
        njit = None
    if njit is not None:
        median_window_jit = njit(cache=True)(_median_window_loop)
        ap_ranked_jit = njit(cache=True)(_ap_ranked_loop)
        USING_NUMBA = True

if USING_NUMBA:
    median_window = median_window_jit
    ap_ranked = ap_ranked_jit
else:
    median_window = median_window_numpy
    ap_ranked = ap_ranked_numpy


def warmup() -> None:
    """Trigger jit compilation outside any timed section."""
    median_window(np.array([0.2, 0.8, 0.5]), 3)
    ap_ranked(np.array([1.0, 0.0, 1.0]))
