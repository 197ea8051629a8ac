"""Deterministic chunked map over a thread pool."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def n_threads() -> int:
    env = os.environ.get("CURVMEAS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, min(8, os.cpu_count() or 1))


def chunked_map(fn, n_items: int, chunk: int = 4096):
    """Apply ``fn(start, stop)`` over consecutive chunks; results in order."""
    bounds = [(s, min(s + chunk, n_items)) for s in range(0, n_items, chunk)]
    threads = n_threads()
    if threads == 1 or len(bounds) <= 1:
        return [fn(s, e) for s, e in bounds]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda b: fn(*b), bounds))
