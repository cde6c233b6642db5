"""Order-preserving map over pure functions, optionally across processes."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

THREADS_ENV = "HARVESTLAB_THREADS"


def worker_count(requested: int | None = None) -> int:
    """Resolve a worker count; ``None`` reads ``HARVESTLAB_THREADS`` (0 = all cores)."""
    if requested is None:
        raw = os.environ.get(THREADS_ENV, "1").strip() or "1"
        try:
            requested = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if requested < 0:
        raise ValueError(f"worker count must be >= 0, got {requested}")
    if requested == 0:
        return os.cpu_count() or 1
    return requested


def parallel_map(fn, items, workers: int | None = None) -> list:
    """``[fn(x) for x in items]``, spread over processes when ``workers > 1``.

    ``fn`` must be picklable for the process path (a module-level function
    or a :func:`functools.partial` of one).  Output order always matches
    input order, so results do not depend on the worker count.
    """
    items = list(items)
    n = worker_count(workers)
    if n <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * n))
    with ProcessPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
