"""
Process-pool map with results in input order
"""
import os
import logging
from multiprocessing import Pool
from typing import Callable, Iterable, List, Optional

logger = logging.getLogger('parallel')


def resolve_workers(threads: Optional[int] = None) -> int:
    """--threads, else DHEOM_THREADS, else the machine's CPU count"""
    if threads is None:
        env_value = os.getenv("DHEOM_THREADS")
        if env_value:
            try:
                threads = int(env_value)
            except ValueError:
                logger.warning(f"ignoring non-integer DHEOM_THREADS={env_value!r}")
    if threads is None:
        threads = os.cpu_count() or 1
    return max(1, int(threads))


def parallel_map(func: Callable, items: Iterable, workers: int = 1) -> List:
    """
    func over items, in input order

    Pool.map takes a single argument per task, so callers pack their arguments
    into tuples. func must be a module-level function.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with Pool(processes=min(workers, len(items))) as pool:
        return pool.map(func, items)
