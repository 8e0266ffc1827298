"""Seed derivation and an order-preserving process pool map."""
from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence

import numpy as np


def _key_part(k) -> int:
    if isinstance(k, (int, np.integer)):
        return int(k)
    return int.from_bytes(hashlib.sha256(str(k).encode()).digest()[:4], "little")


def derive_seed(root: int, *key) -> int:
    """63-bit seed for the task identified by ``key`` under ``root``.

    Uses ``SeedSequence(root, spawn_key=key)``; string key parts are hashed.
    The result depends only on ``root`` and ``key``, never on scheduling.
    """
    ss = np.random.SeedSequence(int(root), spawn_key=tuple(_key_part(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def parallel_map(fn: Callable, tasks: Sequence, jobs: int = 1, chunksize: int | None = None) -> list:
    """``[fn(t) for t in tasks]``, optionally across ``jobs`` processes."""
    tasks = list(tasks)
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    if chunksize is None:
        chunksize = max(1, len(tasks) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=chunksize))
