"""Seed derivation and order-preserving parallel map.

Every stochastic unit of work (a field realization, an MC batch) gets its
own generator seeded by ``SeedSequence(master, spawn_key=(index,))``.  That
is the same stream ``SeedSequence(master).spawn(n)[index]`` would give, so
results depend only on (master seed, index) and never on scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def realization_seed(master: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(master), spawn_key=(int(index),))


def realization_rng(master: int, index: int) -> np.random.Generator:
    return np.random.default_rng(realization_seed(master, index))


def resolve_threads(threads) -> int:
    """Accept an int, None or ``"auto"``."""
    if threads is None:
        return 1
    if threads == "auto":
        return os.cpu_count() or 1
    n = int(threads)
    if n < 1:
        raise ValueError(f"thread count must be >= 1, got {threads}")
    return n


def ordered_map(fn, items, threads=1):
    """``list(map(fn, items))`` run on a thread pool; output order is input order."""
    items = list(items)
    n = resolve_threads(threads)
    if n == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def pairwise_sum(values):
    """Sum along axis 0 with a fixed binary tree, independent of thread count."""
    vals = [np.asarray(v, dtype=float) for v in values]
    if not vals:
        raise ValueError("nothing to sum")
    while len(vals) > 1:
        nxt = [vals[i] + vals[i + 1] for i in range(0, len(vals) - 1, 2)]
        if len(vals) % 2:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]
