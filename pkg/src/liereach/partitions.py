"""Set partitions of term indices: counting, uniform sampling, generator sets."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .pauli import PauliOperator, SizeMismatchError


@dataclass(frozen=True)
class Partition:
    """Disjoint non-empty blocks covering ``range(n_items)``.

    Blocks are stored as sorted tuples, and the block list is sorted by
    smallest element, so equal partitions compare equal.
    """

    n_items: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        blocks = tuple(sorted((tuple(sorted(int(i) for i in b)) for b in self.blocks),
                              key=lambda b: b[0] if b else -1))
        seen = [i for b in blocks for i in b]
        if any(len(b) == 0 for b in blocks):
            raise ValueError("blocks must be non-empty")
        if sorted(seen) != list(range(self.n_items)):
            raise ValueError("blocks must be disjoint and cover 0..n_items-1")
        object.__setattr__(self, "blocks", blocks)

    @property
    def m(self) -> int:
        return len(self.blocks)

    @classmethod
    def singletons(cls, n: int) -> "Partition":
        return cls(n, tuple((i,) for i in range(n)))

    @classmethod
    def single_block(cls, n: int) -> "Partition":
        return cls(n, (tuple(range(n)),))

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "Partition":
        """Build from a block label per item (any hashable labels)."""
        groups: dict = {}
        for i, lab in enumerate(labels):
            groups.setdefault(lab, []).append(i)
        return cls(len(labels), tuple(tuple(g) for g in groups.values()))

    def labels(self) -> np.ndarray:
        """Block index of each item, in canonical block order."""
        out = np.empty(self.n_items, dtype=int)
        for k, b in enumerate(self.blocks):
            out[list(b)] = k
        return out

    def to_dict(self) -> dict:
        return {"n_items": self.n_items, "blocks": [list(b) for b in self.blocks]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "Partition":
        return cls(int(data["n_items"]), tuple(tuple(b) for b in data["blocks"]))

    @classmethod
    def from_json(cls, text: str) -> "Partition":
        return cls.from_dict(json.loads(text))


@lru_cache(maxsize=None)
def _stirling2(n: int, k: int) -> int:
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * _stirling2(n - 1, k) + _stirling2(n - 1, k - 1)


def count_partitions(n: int, m: int) -> int:
    """Stirling number of the second kind ``S(n, m)``, exact."""
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got n={n}, m={m}")
    return _stirling2(n, m)


def sample_partition(n: int, m: int, rng: np.random.Generator | int | None = None) -> Partition:
    """Draw one of the ``S(n, m)`` partitions with exactly ``m`` blocks, uniformly.

    Items are placed from last to first.  With ``j`` items and ``k`` blocks
    left, item ``j - 1`` opens its own block with probability
    ``S(j-1, k-1) / S(j, k)`` and otherwise joins one of the ``k`` blocks
    formed by the remaining items, each with equal weight.
    """
    if not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got n={n}, m={m}")
    rng = np.random.default_rng(rng)
    # decide, top-down, which items open a new block and which join
    opens = np.zeros(n, dtype=bool)
    joins = np.zeros(n, dtype=int)
    k = m
    for j in range(n, 0, -1):
        if k == j:
            opens[:j] = True
            break
        if k > 0 and rng.random() * _stirling2(j, k) < _stirling2(j - 1, k - 1):
            opens[j - 1] = True
            k -= 1
        else:
            joins[j - 1] = int(rng.integers(k))
    # replay bottom-up: the joins target blocks that exist among items < j
    labels = np.empty(n, dtype=int)
    n_blocks = 0
    for j in range(n):
        if opens[j]:
            labels[j] = n_blocks
            n_blocks += 1
        else:
            labels[j] = joins[j]
    return Partition.from_labels(labels.tolist())


def enumerate_partitions(n: int, m: int | None = None) -> Iterator[Partition]:
    """All set partitions of ``range(n)`` (optionally only those with ``m`` blocks)."""

    def rec(i: int, labels: list[int], k: int):
        if i == n:
            if m is None or k == m:
                yield Partition.from_labels(labels)
            return
        if m is not None and k + (n - i) < m:
            return
        for lab in range(k + (m is None or k < m)):
            labels.append(lab)
            yield from rec(i + 1, labels, max(k, lab + 1))
            labels.pop()

    yield from rec(0, [], 0)


def generators_from_partition(terms: Sequence[PauliOperator], p: Partition) -> list[PauliOperator]:
    """Sum the terms of each block; one generator per block in canonical order.

    ``terms`` may be a :class:`~liereach.models.HamiltonianSpec` or any
    sequence of single-term operators.
    """
    ops = terms.operators() if hasattr(terms, "operators") else list(terms)
    if len(ops) != p.n_items:
        raise SizeMismatchError(f"partition covers {p.n_items} items, got {len(ops)} terms")
    out = []
    for block in p.blocks:
        acc = ops[block[0]]
        for i in block[1:]:
            acc = acc + ops[i]
        out.append(acc)
    return out


def partitions_to_csv(rows: Sequence[tuple[int, Partition]]) -> str:
    """CSV of ``(seed, partition)`` pairs for replaying sampled partitions."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["seed", "m", "partition_json"])
    for seed, p in rows:
        w.writerow([seed, p.m, p.to_json()])
    return buf.getvalue()
