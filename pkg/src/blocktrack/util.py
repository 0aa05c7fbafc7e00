"""Small shared helpers."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

from .errors import InvalidArgumentError


def parallel_map(fn, items, threads: int = 1) -> list:
    """Order-preserving map, optionally over a thread pool.

    Work items must be independent; results are returned in input order
    so the outcome never depends on the worker count.
    """
    if threads is None:
        threads = 1
    if int(threads) != threads or threads < 1:
        raise InvalidArgumentError(f"threads must be a positive integer, got {threads}")
    items = list(items)
    if threads == 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=int(threads)) as pool:
        return list(pool.map(fn, items))


@contextmanager
def stage_timer(timings: dict, name: str):
    """Accumulate wall-clock seconds for one pipeline stage."""
    start = time.perf_counter()
    try:
        yield
    finally:
        timings[name] = timings.get(name, 0.0) + (time.perf_counter() - start)
