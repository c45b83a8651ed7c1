"""Order-preserving parallel map for sweeps.

``BCL_THREADS`` caps the number of worker processes (default 1, i.e. run in
process).  Results always come back in input order, so reductions over
them are deterministic regardless of scheduling.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

A = TypeVar("A")
B = TypeVar("B")


def thread_cap() -> int:
    raw = os.environ.get("BCL_THREADS", "1").strip()
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"BCL_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"BCL_THREADS must be a positive integer, got {n}")
    return n


def ordered_map(fn: Callable[[A], B], items: Iterable[A], workers: int | None = None) -> list[B]:
    """``[fn(x) for x in items]``, optionally spread over worker processes.

    ``fn`` must be a module-level callable when more than one worker is used.
    """
    items = list(items)
    workers = thread_cap() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
