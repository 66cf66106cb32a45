import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Sequence, TypeVar

logger = logging.getLogger("modular_spans.worker_pool")

T = TypeVar("T")
R = TypeVar("R")


def map_in_pool(fn: Callable[[T], R], items: Sequence[T], workers: int) -> List[R]:
    """Apply `fn` to every item, in order, on at most `workers` processes.

    `fn` must be a module-level function and items must pickle.
    """
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as executor:
        return list(executor.map(fn, items))


def chunked(items: Sequence[T], chunks: int) -> List[List[T]]:
    if not items:
        return []
    chunks = max(1, min(chunks, len(items)))
    size = -(-len(items) // chunks)
    return [list(items[i : i + size]) for i in range(0, len(items), size)]
