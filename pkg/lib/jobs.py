from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

from .logutil import get_logger

log = get_logger("jobs")

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(fn: Callable[[T], R], items: Iterable[T], max_workers: int = 1) -> List[R]:
    """
    Run independent computations (lifts from distinct labels, per-x_i fiber solves,
    per-node preimage solves) on a thread pool. Results come back in input order so
    the worker count never changes output; the first exception is re-raised.
    """
    items = list(items)
    if max_workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    workers = min(max_workers, len(items))
    log.debug("parallel_map: %d items on %d workers", len(items), workers)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))
