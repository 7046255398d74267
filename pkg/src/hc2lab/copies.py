"""The copy hypergraph: all copies of the k-th power of a Hamilton cycle in K_n.

A copy is a cyclic ordering of the vertices up to rotation and reflection,
stored canonically with ``order[0] == 0`` and ``order[1] < order[-1]``.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .graph_core import EdgeSet, RngStream, check_n, edge_index, edge_index_table, num_words

DEFAULT_BUDGET = 2 * 10**7


class BudgetExceeded(ValueError):
    def __init__(self, what: str, required: int, budget: int):
        super().__init__(f"{what} needs a budget of {required} but the configured budget is {budget}")
        self.required = required
        self.budget = budget


@dataclass(frozen=True)
class CyclicOrdering:
    n: int
    order: tuple[int, ...]

    def __post_init__(self):
        o = self.order
        if len(o) != self.n or sorted(o) != list(range(self.n)):
            raise ValueError(f"{o!r} is not a permutation of range({self.n})")
        if self.n and (o[0] != 0 or (self.n >= 3 and o[1] > o[-1])):
            raise ValueError(f"{o!r} is not in canonical form; use CyclicOrdering.of()")

    @classmethod
    def of(cls, seq: Sequence[int]) -> CyclicOrdering:
        """Canonical representative of the cyclic ordering ``seq``."""
        seq = [int(x) for x in seq]
        n = len(seq)
        r = seq.index(0)
        rot = seq[r:] + seq[:r]
        if n >= 3 and rot[1] > rot[-1]:
            rot = [rot[0]] + rot[:0:-1]
        return cls(n, tuple(rot))

    @classmethod
    def identity(cls, n: int) -> CyclicOrdering:
        return cls(n, tuple(range(n)))

    def __iter__(self):
        return iter(self.order)


def random_copy(n: int, rng: RngStream) -> CyclicOrdering:
    """A uniformly random member of the copy hypergraph."""
    return CyclicOrdering.of(rng.generator().permutation(n))


def power_edges(o: CyclicOrdering | Sequence[int], k: int = 2) -> EdgeSet:
    """Edges joining vertices at cyclic distance at most k in the ordering."""
    order = tuple(o)
    n = len(order)
    if n < 3 or k < 1:
        raise ValueError("power_edges needs n >= 3 and k >= 1")
    bits = 0
    for i in range(n):
        for j in range(1, k + 1):
            a, b = order[i], order[(i + j) % n]
            if a != b:
                bits |= 1 << edge_index(n, a, b)
    return EdgeSet(n, bits)


def count_copies(n: int) -> int:
    if n < 3:
        raise ValueError("copies of a Hamilton cycle need n >= 3")
    return math.factorial(n - 1) // 2


@dataclass(frozen=True, eq=False)
class CopyCatalog:
    """Every canonical ordering together with its k-th power edge bitmask.

    ``orders`` is (N, n) int8 in lexicographic order; ``masks`` is (N, W)
    uint64 in the kernel edge layout.
    """

    n: int
    k: int
    orders: np.ndarray
    masks: np.ndarray

    def __len__(self) -> int:
        return self.orders.shape[0]

    def ordering(self, i: int) -> CyclicOrdering:
        return CyclicOrdering(self.n, tuple(int(x) for x in self.orders[i]))

    def edges(self, i: int) -> EdgeSet:
        return EdgeSet.from_words(self.n, self.masks[i])

    @property
    def all_copies(self) -> list[CyclicOrdering]:
        return [self.ordering(i) for i in range(len(self))]

    @property
    def per_copy_edges(self) -> list[EdgeSet]:
        return [self.edges(i) for i in range(len(self))]

    def index_of(self, o: CyclicOrdering) -> int:
        row = np.asarray(o.order, dtype=np.int8)
        hit = np.flatnonzero(np.all(self.orders == row, axis=1))
        if hit.size == 0:
            raise KeyError(o)
        return int(hit[0])

    def distinct_edge_sets(self) -> int:
        return int(np.unique(self.masks, axis=0).shape[0])


def check_budget(n: int, budget: int = DEFAULT_BUDGET) -> int:
    total = count_copies(n)
    if total > budget:
        raise BudgetExceeded(f"enumerating the {total} copies for n={n}", total, budget)
    return total


@functools.lru_cache(maxsize=8)
def _catalog(n: int, k: int) -> CopyCatalog:
    total = count_copies(n)
    orders, masks = kernels.enumerate_copies(n, k, np.asarray(edge_index_table(n)), num_words(n), total)
    orders.setflags(write=False)
    masks.setflags(write=False)
    return CopyCatalog(n, k, orders, masks)


def enumerate_copies(n: int, k: int = 2, budget: int = DEFAULT_BUDGET) -> CopyCatalog:
    check_n(n)
    if k < 1:
        raise ValueError("k must be >= 1")
    check_budget(n, budget)
    return _catalog(n, k)


def extension_count(n: int, k: int, I: EdgeSet, budget: int = DEFAULT_BUDGET) -> int:
    """|G ∩ <I>|: the number of copies whose power edges contain I."""
    if I.n != n:
        raise ValueError("edge set is over a different n")
    cat = enumerate_copies(n, k, budget)
    return kernels.count_supersets(cat.masks, I.words())


def extension_table(cat: CopyCatalog, S: CyclicOrdering) -> tuple[list[int], np.ndarray]:
    """Extension counts for every subset of the power edges of ``S`` at once.

    Returns ``(positions, table)`` where ``positions`` lists the edge indices
    of S ascending and ``table[x]`` is the extension count of the subset whose
    local bit t selects ``positions[t]``.
    """
    positions = power_edges(S, cat.k).indices()
    local = kernels.gather_local(cat.masks, np.asarray(positions, dtype=np.int64))
    table = np.bincount(local, minlength=1 << len(positions)).astype(np.int64)
    return positions, kernels.superset_sums(table)


def export_catalog_csv(cat: CopyCatalog, path) -> None:
    from .io import atomic_write_text, csv_text

    rows = (
        (i, " ".join(str(int(x)) for x in cat.orders[i]), format(cat.edges(i).bits, "x"))
        for i in range(len(cat))
    )
    atomic_write_text(path, csv_text(["copy_index", "ordering", "edge_bitmask_hex"], rows))
