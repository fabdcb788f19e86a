"""Deterministic process-parallel map.

Work is split into fixed chunks independent of the worker count and merged
in chunk order, so results never depend on how many workers ran.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor


def worker_count(requested: int | None = None) -> int:
    """Requested count capped by ``ML_WORKERS`` (default: CPU count)."""
    cap = os.environ.get("ML_WORKERS")
    n = requested if requested is not None else (os.cpu_count() or 1)
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            pass
    return max(1, n)


def chunk_ranges(start: int, stop: int, size: int) -> list[tuple[int, int]]:
    return [(a, min(a + size, stop)) for a in range(start, stop, size)]


def ordered_map(fn, tasks, workers: int = 1, stop_when=None):
    """Apply ``fn`` to ``tasks``; results come back in task order.

    If ``stop_when(result)`` is true, later tasks are dropped (they may have
    run, but never contribute).  Tasks are submitted in windows so an early
    stop does not schedule the whole range.
    """
    tasks = list(tasks)
    out = []
    if workers <= 1 or len(tasks) <= 1:
        for t in tasks:
            r = fn(*t)
            out.append(r)
            if stop_when is not None and stop_when(r):
                break
        return out
    window = 2 * workers
    with ProcessPoolExecutor(max_workers=workers) as pool:
        pos = 0
        while pos < len(tasks):
            batch = tasks[pos : pos + window]
            futures = [pool.submit(fn, *t) for t in batch]
            for f in futures:
                r = f.result()
                out.append(r)
                if stop_when is not None and stop_when(r):
                    for rest in futures:
                        rest.cancel()
                    return out
            pos += window
    return out
