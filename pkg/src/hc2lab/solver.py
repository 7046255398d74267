"""Exact search for a spanning power of a Hamilton cycle, and minimum fragments."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .copies import CyclicOrdering, enumerate_copies, power_edges
from .graph_core import EdgeSet, Graph, RngStream

FOUND = "found"
EXHAUSTED = "exhausted_no"
UNKNOWN = "budget_unknown"


@dataclass(frozen=True)
class SearchBudget:
    node_limit: int = 10**9
    time_limit: float = 300.0

    def __post_init__(self):
        if self.node_limit <= 0 or self.time_limit <= 0:
            raise ValueError("search budgets must be positive")


@dataclass(frozen=True)
class SearchOutcome:
    status: str
    witness: Optional[CyclicOrdering]
    nodes: int
    seconds: float = 0.0

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "witness": list(self.witness.order) if self.witness else None,
            "nodes": self.nodes,
            "seconds": round(self.seconds, 6),
        }


@dataclass(frozen=True)
class FragmentResult:
    status: str  # FOUND (size set), EXHAUSTED (every fragment exceeds cap) or UNKNOWN
    size: Optional[int]
    witness: Optional[CyclicOrdering]
    nodes: int


class SearchIncomplete(RuntimeError):
    pass


def _priorities(n: int, rng: Optional[RngStream]) -> np.ndarray:
    if rng is None:
        return np.arange(n, dtype=np.int64)
    return rng.generator().permutation(n).astype(np.int64)


def _run(adj, wadj, k, cap, first_only, budget, rng, prune):
    n = adj.shape[0]
    budget = budget or SearchBudget()
    degs = np.bitwise_count(adj)
    v0 = int(np.argmin(degs))
    t0 = time.perf_counter()
    status, best, order, nodes = kernels.power_search(
        np.ascontiguousarray(adj, dtype=np.uint64),
        np.ascontiguousarray(wadj, dtype=np.uint64),
        int(k),
        v0,
        _priorities(n, rng),
        int(cap),
        bool(first_only),
        bool(prune),
        int(budget.node_limit),
        t0 + float(budget.time_limit),
    )
    seconds = time.perf_counter() - t0
    witness = CyclicOrdering.of(order) if best >= 0 else None
    return int(status), int(best), witness, int(nodes), seconds


def find_power_ham(
    G: Graph,
    k: int = 2,
    budget: Optional[SearchBudget] = None,
    rng: Optional[RngStream] = None,
    prune: bool = True,
) -> SearchOutcome:
    """Decide whether G contains the k-th power of a Hamilton cycle.

    ``rng`` only perturbs tie-breaking in the value ordering.
    """
    if G.n < 3:
        raise ValueError("need n >= 3")
    adj = G.adjacency
    status, best, witness, nodes, secs = _run(adj, adj, k, 0, True, budget, rng, prune)
    if status == kernels.SEARCH_BUDGET:
        return SearchOutcome(UNKNOWN, None, nodes, secs)
    if best < 0:
        return SearchOutcome(EXHAUSTED, None, nodes, secs)
    assert power_edges(witness, k).issubset(G.edges), "witness failed verification"
    return SearchOutcome(FOUND, witness, nodes, secs)


def find_min_fragment(
    S: CyclicOrdering,
    W: EdgeSet,
    k: int = 2,
    cap: Optional[int] = None,
    budget: Optional[SearchBudget] = None,
    prune: bool = True,
) -> FragmentResult:
    """Cheapest copy J inside power_edges(S) ∪ W, costed by |J \\ W|."""
    n = S.n
    if W.n != n:
        raise ValueError("W is over a different n")
    if cap is None:
        cap = len(power_edges(S, k))
    if cap < 0:
        raise ValueError("cap must be >= 0")
    U = power_edges(S, k) | W
    status, best, witness, nodes, _ = _run(
        Graph(n, U).adjacency, Graph(n, W).adjacency, k, cap, False, budget, None, prune
    )
    if status == kernels.SEARCH_BUDGET:
        return FragmentResult(UNKNOWN, None, None, nodes)
    if best < 0:
        return FragmentResult(EXHAUSTED, None, None, nodes)
    return FragmentResult(FOUND, best, witness, nodes)


def min_fragment(
    S: CyclicOrdering,
    W: EdgeSet,
    k: int = 2,
    cap: Optional[int] = None,
    budget: Optional[SearchBudget] = None,
) -> Optional[int]:
    """Smallest |J \\ W| over copies J ⊆ S ∪ W, or None when all exceed ``cap``.

    Raises :class:`SearchIncomplete` when the budget runs out.
    """
    res = find_min_fragment(S, W, k, cap, budget)
    if res.status == UNKNOWN:
        raise SearchIncomplete(f"fragment search exceeded budget after {res.nodes} nodes")
    return res.size


def min_fragment_catalog(S: CyclicOrdering, W: EdgeSet, k: int = 2, cap: Optional[int] = None) -> Optional[int]:
    """Brute-force :func:`min_fragment` by scanning every copy."""
    cat = enumerate_copies(S.n, k)
    allowed = (power_edges(S, k) | W).words()
    w = W.words()
    inside = np.all((cat.masks & ~allowed) == 0, axis=1)
    if not inside.any():
        return None
    sizes = np.bitwise_count(cat.masks[inside] & ~w).sum(axis=1)
    best = int(sizes.min())
    if cap is not None and best > cap:
        return None
    return best


def contains_copy_catalog(G: Graph, k: int = 2) -> bool:
    cat = enumerate_copies(G.n, k)
    return bool(np.any(np.all((cat.masks & ~G.edges.words()) == 0, axis=1)))
