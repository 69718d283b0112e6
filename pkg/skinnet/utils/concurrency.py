"""
Bounded, order-preserving prefetch for data loading and augmentation.
"""
from __future__ import annotations

from collections import deque
from collections.abc import Callable, Iterable, Iterator
from concurrent.futures import Future, ThreadPoolExecutor
from typing import TypeVar

T = TypeVar("T")


def prefetch(jobs: Iterable[Callable[[], T]], workers: int = 2, queue_size: int = 8) -> Iterator[T]:
    """
    Run ``jobs`` on worker threads, yielding results in submission order.

    At most ``queue_size`` jobs are in flight, so a slow consumer bounds memory.
    Each job owns its sample; the consumer only ever sees finished results.
    With ``workers <= 0`` jobs run inline on the calling thread.

    Args:
        jobs: Zero-argument callables producing one item each
        workers: Number of worker threads
        queue_size: Maximum number of submitted but unconsumed jobs

    Yields:
        Job results, in the order the jobs were given
    """
    if workers <= 0:
        for job in jobs:
            yield job()
        return

    pending: deque[Future[T]] = deque()
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="skinnet-data") as pool:
        for job in jobs:
            pending.append(pool.submit(job))
            if len(pending) >= max(1, queue_size):
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()
