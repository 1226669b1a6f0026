"""Small shared utilities: thread budget and deterministic parallel map."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
U = TypeVar("U")

__all__ = ["thread_budget", "parallel_map"]


def thread_budget() -> int:
    """Worker cap: the QDIM_THREADS environment variable, else the CPU count.

    Values below 1 (or anything unparsable) fall back to 1.
    """
    raw = os.environ.get("QDIM_THREADS")
    if raw is not None:
        try:
            return max(1, int(raw))
        except ValueError:
            return 1
    return os.cpu_count() or 1


def parallel_map(fn: Callable[[T], U], items: Sequence[T] | Iterable[T]) -> list[U]:
    """Map ``fn`` over ``items``, preserving order.

    Runs on a thread pool capped by :func:`thread_budget`; with a budget of
    one (or a single item) it degrades to a plain loop.  Results are
    returned in input order, so callers see identical output either way.
    """
    items = list(items)
    workers = min(thread_budget(), len(items)) if items else 1
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
