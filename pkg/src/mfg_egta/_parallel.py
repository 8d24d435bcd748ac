"""Optional per-population thread fan-out.

Best responses for different populations are independent pure computations,
so they may run on a thread pool. Results are always collected in population
index order, which keeps numeric output identical with and without threads.
The ``MFG_EGTA_THREADS`` environment variable caps the pool size.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

T = TypeVar("T")

_ENV_VAR = "MFG_EGTA_THREADS"


def max_threads() -> int:
    raw = os.environ.get(_ENV_VAR, "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError as exc:
            raise ValueError(f"{_ENV_VAR} must be an integer, got {raw!r}") from exc
        return max(1, n)
    return os.cpu_count() or 1


def population_map(fn: Callable[[int], T], n_populations: int, parallel: bool) -> list[T]:
    """Apply ``fn`` to each population index, optionally on a thread pool."""
    workers = min(n_populations, max_threads()) if parallel else 1
    if workers <= 1 or n_populations <= 1:
        return [fn(i) for i in range(n_populations)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n_populations)))
