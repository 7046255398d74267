"""Vertices, edges and edge subsets of K_n, graphs, and seeded sampling.

Edges of K_n carry a fixed lexicographic index ``0 .. C(n,2)-1``; an
:class:`EdgeSet` is that index set stored as a Python int bitmask, and the
array kernels use the same layout split into uint64 words.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

MAX_N = 64


def check_n(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"vertex count must be a positive integer, got {n!r}")
    if n > MAX_N:
        raise ValueError(f"n={n} exceeds the dense-representation ceiling MAX_N={MAX_N}")


def num_edges(n: int) -> int:
    return n * (n - 1) // 2


def edge_index(n: int, u: int, v: int) -> int:
    if u > v:
        u, v = v, u
    if not (0 <= u < v < n):
        raise ValueError(f"invalid edge ({u}, {v}) for n={n}")
    return u * n - u * (u + 1) // 2 + (v - u - 1)


@functools.lru_cache(maxsize=None)
def edge_list(n: int) -> tuple[tuple[int, int], ...]:
    """All canonical edges of K_n in index order."""
    return tuple((u, v) for u in range(n) for v in range(u + 1, n))


@functools.lru_cache(maxsize=None)
def edge_index_table(n: int) -> np.ndarray:
    """Symmetric (n, n) int64 table of edge indices, -1 on the diagonal."""
    t = np.full((n, n), -1, dtype=np.int64)
    for e, (u, v) in enumerate(edge_list(n)):
        t[u, v] = t[v, u] = e
    t.setflags(write=False)
    return t


def num_words(n: int) -> int:
    return max(1, -(-num_edges(n) // 64))


def bits_to_words(bits: int, nwords: int) -> np.ndarray:
    out = np.zeros(nwords, dtype=np.uint64)
    for w in range(nwords):
        out[w] = (bits >> (64 * w)) & 0xFFFFFFFFFFFFFFFF
    return out


def words_to_bits(words) -> int:
    bits = 0
    for w, x in enumerate(words):
        bits |= int(x) << (64 * w)
    return bits


@dataclass(frozen=True)
class EdgeSet:
    """A set of canonical edges of K_n, as a bitmask over edge indices."""

    n: int
    bits: int = 0

    def __post_init__(self):
        check_n(self.n)
        if self.bits < 0 or self.bits >> num_edges(self.n):
            raise ValueError("bitmask has bits outside E(K_n)")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> EdgeSet:
        bits = 0
        for u, v in edges:
            bits |= 1 << edge_index(n, u, v)
        return cls(n, bits)

    @classmethod
    def from_indices(cls, n: int, indices: Iterable[int]) -> EdgeSet:
        bits = 0
        for e in indices:
            bits |= 1 << int(e)
        return cls(n, bits)

    @classmethod
    def full(cls, n: int) -> EdgeSet:
        return cls(n, (1 << num_edges(n)) - 1)

    @classmethod
    def from_words(cls, n: int, words) -> EdgeSet:
        return cls(n, words_to_bits(words))

    def indices(self) -> list[int]:
        out, b = [], self.bits
        while b:
            low = b & -b
            out.append(low.bit_length() - 1)
            b ^= low
        return out

    def edges(self) -> list[tuple[int, int]]:
        el = edge_list(self.n)
        return [el[e] for e in self.indices()]

    def words(self) -> np.ndarray:
        return bits_to_words(self.bits, num_words(self.n))

    def canonical(self) -> EdgeSet:
        return EdgeSet.from_edges(self.n, self.edges())

    def vertices(self) -> set[int]:
        return {x for e in self.edges() for x in e}

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __iter__(self):
        return iter(self.edges())

    def __contains__(self, edge) -> bool:
        u, v = edge
        return bool(self.bits >> edge_index(self.n, u, v) & 1)

    def _same_n(self, other: EdgeSet) -> None:
        if self.n != other.n:
            raise ValueError(f"edge sets over different n ({self.n} vs {other.n})")

    def __or__(self, other: EdgeSet) -> EdgeSet:
        self._same_n(other)
        return EdgeSet(self.n, self.bits | other.bits)

    def __and__(self, other: EdgeSet) -> EdgeSet:
        self._same_n(other)
        return EdgeSet(self.n, self.bits & other.bits)

    def __sub__(self, other: EdgeSet) -> EdgeSet:
        self._same_n(other)
        return EdgeSet(self.n, self.bits & ~other.bits)

    def issubset(self, other: EdgeSet) -> bool:
        self._same_n(other)
        return self.bits & ~other.bits == 0

    __le__ = issubset

    def __repr__(self) -> str:
        return f"EdgeSet(n={self.n}, edges={self.edges()})"


@dataclass(frozen=True)
class Graph:
    n: int
    edges: EdgeSet
    adjacency: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.edges.n != self.n:
            raise ValueError("edge set and graph disagree on n")
        adj = np.zeros(self.n, dtype=np.uint64)
        for u, v in self.edges.edges():
            adj[u] |= np.uint64(1) << np.uint64(v)
            adj[v] |= np.uint64(1) << np.uint64(u)
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> Graph:
        return cls(n, EdgeSet.from_edges(n, edges))

    @classmethod
    def complete(cls, n: int) -> Graph:
        return cls(n, EdgeSet.full(n))

    def degrees(self) -> np.ndarray:
        return np.bitwise_count(self.adjacency).astype(np.int64)

    def num_edges(self) -> int:
        return len(self.edges)

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self.edges


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream keyed by (master_seed, stream_id).

    Backed by the counter-based Philox generator, so every (seed, stream)
    pair yields an independent sequence without shared state.
    """

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array(
            [self.master_seed & 0xFFFFFFFFFFFFFFFF, self.stream_id & 0xFFFFFFFFFFFFFFFF],
            dtype=np.uint64,
        )
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, *ids: int) -> RngStream:
        """Derive a sub-stream; distinct id tuples give distinct streams."""
        ss = np.random.SeedSequence([self.stream_id & 0xFFFFFFFFFFFFFFFF, *ids])
        sid = int(ss.generate_state(1, dtype=np.uint64)[0])
        return RngStream(self.master_seed, sid)


def sample_gnp(n: int, p: float, rng: RngStream) -> Graph:
    check_n(n)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    u = rng.generator().random(num_edges(n))
    return Graph(n, EdgeSet.from_indices(n, np.flatnonzero(u < p)))


def threshold_graph(n: int, uniforms: np.ndarray, p: float) -> Graph:
    """The graph {e : U_e < p} for a fixed vector of edge uniforms (coupled sampling)."""
    return Graph(n, EdgeSet.from_indices(n, np.flatnonzero(uniforms < p)))


def sample_gnm(n: int, m_edges: int, rng: RngStream) -> Graph:
    check_n(n)
    m = num_edges(n)
    if not 0 <= m_edges <= m:
        raise ValueError(f"m_edges must lie in [0, {m}], got {m_edges}")
    chosen = rng.generator().choice(m, size=m_edges, replace=False)
    return Graph(n, EdgeSet.from_indices(n, chosen))


class EdgeSubsetStats(NamedTuple):
    l: int  # noqa: E741 - edge count
    c: int
    v: int


def stats(I: EdgeSet) -> EdgeSubsetStats:
    """Edge count, component count and vertex count of the graph (V(I), I)."""
    parent: dict[int, int] = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in I.edges():
        parent.setdefault(u, u)
        parent.setdefault(v, v)
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    comps = sum(1 for x in parent if find(x) == x)
    return EdgeSubsetStats(len(I), comps, len(parent))


def components(I: EdgeSet) -> list[EdgeSet]:
    groups: dict[int, list[tuple[int, int]]] = {}
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = I.edges()
    for u, v in edges:
        parent.setdefault(u, u)
        parent.setdefault(v, v)
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    for u, v in edges:
        groups.setdefault(find(u), []).append((u, v))
    return [EdgeSet.from_edges(I.n, g) for g in groups.values()]


# ---------------------------------------------------------------------------
# text graph format: "n m" then m lines "u v"


def format_graph(g: Graph) -> str:
    lines = [f"{g.n} {g.num_edges()}"]
    lines += [f"{u} {v}" for u, v in g.edges.edges()]
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows or len(rows[0]) != 2:
        raise ValueError("graph file must start with a line 'n m'")
    n, m = (int(x) for x in rows[0])
    check_n(n)
    body = rows[1:]
    if len(body) != m:
        raise ValueError(f"header declares {m} edges but {len(body)} edge lines follow")
    seen = set()
    for row in body:
        if len(row) != 2:
            raise ValueError(f"malformed edge line: {' '.join(row)!r}")
        u, v = int(row[0]), int(row[1])
        if not (0 <= u < v < n):
            raise ValueError(f"edge ({u}, {v}) out of range or not canonical (need 0 <= u < v < {n})")
        if (u, v) in seen:
            raise ValueError(f"duplicate edge ({u}, {v})")
        seen.add((u, v))
    return Graph.from_edges(n, seen)


def read_graph(path) -> Graph:
    with open(path) as fh:
        return parse_graph(fh.read())


def write_graph(g: Graph, path) -> None:
    from .io import atomic_write_text

    atomic_write_text(path, format_graph(g))


def random_uniforms(n: int, rng: RngStream) -> np.ndarray:
    return rng.generator().random(num_edges(n))
