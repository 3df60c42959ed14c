"""Order-preserving map over independent work units."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

T = TypeVar("T")
R = TypeVar("R")

# Seed domains keep experiments from sharing random streams.
SURVEY_DOMAIN = 1
CHAIN_DOMAIN = 2
CLASSIFY_DOMAIN = 3
CONCENTRATION_DOMAIN = 4
PILOT_DOMAIN = 5
DECOUPLING_DOMAIN = 6


def parallel_map(fn: Callable[[T], R], units: Iterable[T], threads: int = 1) -> list[R]:
    """``[fn(u) for u in units]``, optionally spread over worker processes.

    Results come back in unit order, so merged output is independent of the
    worker count. ``fn`` must be picklable when ``threads > 1``.
    """
    units = list(units)
    if threads < 1:
        raise ValueError("threads must be at least 1")
    if threads == 1 or len(units) <= 1:
        return [fn(u) for u in units]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, units, chunksize=max(1, len(units) // (4 * threads))))
