"""Seeded, splittable random streams.

Every unit of work (trial, grid point, angle sample) gets its own Philox
stream keyed by ``(seed, *key)``, so results do not depend on the order or
the number of threads used to compute them.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

SEED_MASK = (1 << 64) - 1


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for work item ``key`` under ``seed``."""
    ss = np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def resolve_threads(threads: int | None) -> int:
    if threads is None or threads <= 0:
        return max(1, min(8, os.cpu_count() or 1))
    return int(threads)


def parallel_map(fn: Callable[[T], R], items: Sequence[T] | Iterable[T], threads: int | None = 1) -> list[R]:
    """Order-preserving map over ``items`` with at most ``threads`` workers."""
    items = list(items)
    n = resolve_threads(threads)
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def chunks(total: int, size: int) -> list[range]:
    return [range(i, min(i + size, total)) for i in range(0, total, size)]
