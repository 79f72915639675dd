"""Order-preserving process-pool map for independent trajectories."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def parallel_map(fn, items, workers: int = 1) -> list:
    """``[fn(x) for x in items]``, spread over ``workers`` processes.

    Results come back in input order whatever the schedule. ``fn`` must be a
    module-level function so it can be pickled.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
