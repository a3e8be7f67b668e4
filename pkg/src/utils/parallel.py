"""
Thread pool helpers.

Quadrature kernels split their output nodes into blocks and evaluate the
blocks concurrently. Numpy releases the GIL inside its array loops, so a
thread pool is enough. Results are always reassembled in block order, which
keeps every evaluation bit-identical regardless of the thread count.
"""

import os
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')

_lock = threading.Lock()
_thread_count = 1


def resolve_thread_count(threads: int) -> int:
    """
    Resolve a requested thread count.

    Args:
        threads: Requested count, 0 meaning one per available CPU

    Returns:
        int: Positive thread count
    """
    if threads < 0:
        raise ValueError(f"thread count must be nonnegative, got {threads}")
    if threads == 0:
        return max(1, os.cpu_count() or 1)
    return threads


def set_thread_count(threads: int) -> int:
    """Set the process-wide worker count used by parallel_map."""
    global _thread_count
    resolved = resolve_thread_count(threads)
    with _lock:
        _thread_count = resolved
    logger.debug(f"Quadrature worker threads set to {resolved}")
    return resolved


def get_thread_count() -> int:
    with _lock:
        return _thread_count


def parallel_map(func: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """
    Apply func to every item, preserving input order in the result.

    Args:
        func: Function free of shared mutable state
        items: Work items

    Returns:
        list: func(item) for each item, in order
    """
    items = list(items)
    workers = min(get_thread_count(), len(items))
    if workers <= 1:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))
