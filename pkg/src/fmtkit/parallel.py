"""Order-preserving parallel map over worker processes."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable


def default_workers() -> int:
    return os.cpu_count() or 1


def ordered_map(fn: Callable, items: Iterable, workers: int | None = None, chunksize: int = 8) -> list:
    """``[fn(x) for x in items]``, computed by up to ``workers`` processes.

    Results keep input order, so output never depends on scheduling.
    """
    items = list(items)
    if workers is None:
        workers = default_workers()
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))
