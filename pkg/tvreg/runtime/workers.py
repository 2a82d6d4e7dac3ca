"""Bounded thread pool for independent solves."""

from __future__ import annotations

import logging
import os
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger("tvreg.runtime")


def max_threads() -> int:
    """``TVREG_THREADS``, read at call time; default 1."""
    return max(1, int(os.environ.get("TVREG_THREADS", "1")))


def ordered_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Apply ``fn`` to every item, results in input order.

    Runs inline when only one thread is allowed, so single-threaded runs
    never touch an executor.
    """
    work = list(items)
    threads = min(max_threads(), len(work))
    if threads <= 1:
        return [fn(item) for item in work]
    logger.debug("running %d tasks on %d threads", len(work), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, work))
