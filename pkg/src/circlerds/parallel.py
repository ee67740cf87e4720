"""Thread-level parallelism over independent lanes.

Work is always cut into chunks of ``CHUNK`` lanes regardless of the thread
count, and results are reassembled in lane order, so the output never depends
on how many workers ran. The compiled kernels release the GIL.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK = 2048
ENV_THREADS = "CIRCLERDS_THREADS"

_threads: int | None = None


def set_threads(n: int | None) -> None:
    global _threads
    if n is not None and n < 1:
        raise ValueError("thread count must be >= 1")
    _threads = n


def get_threads() -> int:
    if _threads is not None:
        return _threads
    raw = os.environ.get(ENV_THREADS, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_THREADS} must be an integer, got {raw!r}") from None
    return max(1, n)


def chunked(func, n_lanes: int, n_out: int, threads: int | None = None):
    """Run ``func(lo, hi)`` over fixed-size lane chunks and concatenate.

    ``func`` returns a tuple of ``n_out`` arrays whose last axis is the lane
    axis of the chunk.
    """
    bounds = [(lo, min(lo + CHUNK, n_lanes)) for lo in range(0, n_lanes, CHUNK)]
    threads = get_threads() if threads is None else threads
    if threads <= 1 or len(bounds) <= 1:
        parts = [func(lo, hi) for lo, hi in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: func(*b), bounds))
    if not parts:
        return tuple(np.empty(0) for _ in range(n_out))
    return tuple(np.concatenate([p[i] for p in parts], axis=-1) for i in range(n_out))
