"""Ordered, thread-capped mapping over contiguous index chunks."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

from src.config.config import get_thread_count

T = TypeVar("T")

# smallest chunk handed to a worker
MIN_CHUNK = 512


def chunk_bounds(n_items: int, workers: int, min_chunk: int = MIN_CHUNK) -> list[tuple[int, int]]:
    """Split range(n_items) into at most `workers` contiguous (start, stop) pairs."""
    if n_items <= 0:
        return []
    n_chunks = max(1, min(workers, n_items // min_chunk or 1))
    step = -(-n_items // n_chunks)
    return [(start, min(start + step, n_items)) for start in range(0, n_items, step)]


def ordered_chunk_map(
    fn: Callable[[int, int], T],
    n_items: int,
    workers: int | None = None,
    min_chunk: int = MIN_CHUNK,
) -> list[T]:
    """Apply fn(start, stop) to each chunk and return the results in chunk order.

    Each chunk is computed independently, so the concatenated result does not depend
    on the worker count.
    """
    workers = get_thread_count() if workers is None else max(1, workers)
    bounds = chunk_bounds(n_items, workers, min_chunk)
    if len(bounds) <= 1:
        return [fn(start, stop) for start, stop in bounds]
    with ThreadPoolExecutor(max_workers=len(bounds)) as pool:
        return list(pool.map(lambda b: fn(*b), bounds))
