"""Exhaustive checks of the spread and counting bounds on enumerable instances.

Every comparison is exact: integer/rational left-hand sides against either
exact right-hand sides or certified interval enclosures, where ``holds``
requires the left side to sit below the lower end of the enclosure.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Optional, Sequence

import mpmath
import numpy as np

from . import kernels
from .copies import (
    CyclicOrdering,
    count_copies,
    enumerate_copies,
    extension_count,
    extension_table,
    power_edges,
    random_copy,
)
from .graph_core import EdgeSet, Graph, RngStream, num_edges, stats
from .numerics import at_most_q_power, binom, e_power_bound, falling, q_value


@dataclass(frozen=True)
class SpreadParams:
    n: int
    q: mpmath.mpf

    @classmethod
    def for_n(cls, n: int) -> SpreadParams:
        return cls(n, q_value(n))


@dataclass(frozen=True)
class AuditReport:
    statement: str
    instance: dict
    lhs: Any
    rhs: Any
    holds: bool
    note: str = ""

    def row(self) -> list:
        params = ";".join(f"{k}={v}" for k, v in self.instance.items())
        return [self.statement, self.instance.get("n", ""), params, _fmt(self.lhs), _fmt(self.rhs), self.holds]


def _fmt(x) -> str:
    if isinstance(x, tuple):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    if isinstance(x, Fraction) and x.denominator != 1:
        return f"{x.numerator}/{x.denominator}"
    return str(x)


REPORT_HEADER = ["statement", "n", "instance_params", "lhs", "rhs", "holds"]


@dataclass(frozen=True)
class OverlapHistogram:
    n: int
    counts: tuple[int, ...]

    def __post_init__(self):
        if sum(self.counts) != count_copies(self.n):
            raise ValueError("histogram does not partition the copy hypergraph")

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def f(self) -> tuple[Fraction, ...]:
        t = self.total
        return tuple(Fraction(c, t) for c in self.counts)


@dataclass(frozen=True)
class SpreadProfileEntry:
    size: int
    max_count: int
    max_spread: float
    q: float
    exceeds_q: bool
    samples: int = 0
    quantiles: dict = field(default_factory=dict)


def _subsets_upto(items: Sequence, max_size: int) -> Iterable[tuple]:
    for s in range(max_size + 1):
        yield from itertools.combinations(items, s)


# ---------------------------------------------------------------------------
# local spread


def local_spread_profile(
    n: int,
    sizes: Sequence[int],
    mode: str = "exhaustive",
    rng: Optional[RngStream] = None,
    samples: int = 1000,
) -> list[SpreadProfileEntry]:
    """Largest local spread (|G ∩ <I>|/|G|)^(1/|I|) per size |I|.

    I ranges over subsets of copies. All copies are images of one another
    under vertex permutations, so exhaustive mode scans the subsets of a
    single fixed copy. Size 0 is skipped.
    """
    cat = enumerate_copies(n)
    total = len(cat)
    sizes = [s for s in sizes if s > 0]
    q = float(q_value(n))
    out = []
    if mode == "exhaustive":
        _, table = extension_table(cat, CyclicOrdering.identity(n))
        pop = np.bitwise_count(np.arange(table.shape[0], dtype=np.uint64))
        for s in sizes:
            best = int(table[pop == s].max())
            ratio = Fraction(best, total)
            out.append(
                SpreadProfileEntry(s, best, float(ratio) ** (1 / s), q, not at_most_q_power(ratio, s, n))
            )
        return out
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    if rng is None:
        raise ValueError("sampled mode needs an rng")
    gen = rng.generator()
    for s in sizes:
        counts = np.empty(samples, dtype=np.int64)
        for t in range(samples):
            S = random_copy(n, RngStream(rng.master_seed, int(gen.integers(2**63))))
            idx = power_edges(S).indices()
            I = EdgeSet.from_indices(n, gen.choice(idx, size=s, replace=False))
            counts[t] = kernels.count_supersets(cat.masks, I.words())
        best = int(counts.max())
        spreads = (counts / total) ** (1 / s)
        ratio = Fraction(best, total)
        out.append(
            SpreadProfileEntry(
                s,
                best,
                float(ratio) ** (1 / s),
                q,
                not at_most_q_power(ratio, s, n),
                samples,
                {p: float(np.quantile(spreads, p)) for p in (0.1, 0.5, 0.9)},
            )
        )
    return out


# ---------------------------------------------------------------------------
# counting propositions


def prop_easy_rhs(n: int, l: int, c: int) -> int:
    return 16**l * math.factorial(n - math.ceil((l + c) / 2) - 1)


def check_prop_easy(n: int, I: EdgeSet, lhs: Optional[int] = None) -> AuditReport:
    """|G ∩ <I>| <= 16^l (n - ceil((l+c)/2) - 1)! for l <= n/3."""
    l, c, v = stats(I)
    if 3 * l > n:
        raise ValueError(f"l={l} exceeds n/3 for n={n}")
    if lhs is None:
        lhs = extension_count(n, 2, I)
    rhs = prop_easy_rhs(n, l, c)
    return AuditReport("prop_easy", {"n": n, "l": l, "c": c, "v": v, "I": I.indices()}, lhs, rhs, lhs <= rhs)


def audit_prop_easy(n: int, max_l: int, S: Optional[CyclicOrdering] = None) -> list[AuditReport]:
    """Every I inside a fixed copy with |I| <= max_l."""
    if 3 * max_l > n:
        raise ValueError(f"max_l={max_l} exceeds n/3 for n={n}")
    S = S or CyclicOrdering.identity(n)
    cat = enumerate_copies(n)
    positions, table = extension_table(cat, S)
    reports = []
    for combo in _subsets_upto(range(len(positions)), max_l):
        local = sum(1 << t for t in combo)
        I = EdgeSet.from_indices(n, (positions[t] for t in combo))
        reports.append(check_prop_easy(n, I, lhs=int(table[local])))
    return reports


def subgraph_census(F: EdgeSet, max_edges: int = 20) -> dict[tuple[int, int], int]:
    """Number of subgraphs of F with each (edge count, component count)."""
    edges = F.edges()
    h = len(edges)
    if h > max_edges:
        raise ValueError(f"|F|={h} exceeds the enumeration budget of {max_edges} edges")
    census: dict[tuple[int, int], int] = {}
    for mask in range(1 << h):
        parent: dict[int, int] = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        l = comps = 0
        m = mask
        while m:
            low = m & -m
            u, v = edges[low.bit_length() - 1]
            m ^= low
            l += 1
            for x in (u, v):
                if x not in parent:
                    parent[x] = x
                    comps += 1
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
                comps -= 1
        census[(l, comps)] = census.get((l, comps), 0) + 1
    return census


def check_prop_easy2(F: EdgeSet, l: int, c: int, census: Optional[dict] = None, max_edges: int = 20) -> AuditReport:
    """#subgraphs of F with l edges and c components <= (8e)^l C(2h, c)."""
    if census is None:
        census = subgraph_census(F, max_edges)
    h = len(F)
    lhs = census.get((l, c), 0)
    lo, hi = e_power_bound(8, l, binom(2 * h, c))
    return AuditReport("prop_easy2", {"n": F.n, "h": h, "l": l, "c": c}, lhs, (lo, hi), lhs <= lo)


def audit_prop_easy2(F: EdgeSet, max_edges: int = 20) -> list[AuditReport]:
    census = subgraph_census(F, max_edges)
    return [check_prop_easy2(F, l, c, census) for (l, c) in sorted(census)]


# ---------------------------------------------------------------------------
# tree lemma


def count_connected_subgraphs(
    neighbors: Callable[[int], Iterable[tuple[int, int]]], root: int, h: int
) -> int:
    """Count connected h-edge subgraphs containing ``root``.

    ``neighbors(x)`` yields (edge_id, other_endpoint) pairs. Each subgraph is
    generated once: the first frontier edge taken bans all earlier ones.
    """
    if h == 0:
        return 1

    def rec(size, frontier, vset):
        if size == h - 1:
            return len(frontier)
        total = 0
        for idx, (e, a, b) in enumerate(frontier):
            rest = frontier[idx + 1:]
            w = b if a in vset else a
            if w in vset:
                total += rec(size + 1, rest, vset)
            else:
                new = [(f, w, x) for f, x in neighbors(w) if x not in vset]
                total += rec(size + 1, rest + new, vset | {w})
        return total

    start = [(e, root, x) for e, x in neighbors(root)]
    return rec(0, start, frozenset([root]))


def graph_neighbors(G: Graph) -> Callable[[int], list[tuple[int, int]]]:
    from .graph_core import edge_index

    adj = [[(edge_index(G.n, u, x), x) for x in range(G.n) if x != u and G.has_edge(u, x)] for u in range(G.n)]
    return adj.__getitem__


def branching_tree_neighbors(delta: int) -> Callable[[int], list[tuple[int, int]]]:
    """Neighbourhoods in the infinite rooted delta-branching tree (heap numbering).

    Node x has children delta*x + 1 .. delta*x + delta; the edge to a node's
    parent carries the node's own id.
    """

    def nb(x):
        out = [(c, c) for c in range(delta * x + 1, delta * x + delta + 1)]
        if x:
            out.append((x, (x - 1) // delta))
        return out

    return nb


def rooted_subtree_count(delta: int, v: int) -> int:
    """Rooted v-vertex subtrees of the delta-branching tree, by explicit enumeration."""
    if v < 1:
        raise ValueError("v must be >= 1")
    return count_connected_subgraphs(branching_tree_neighbors(delta), 0, v - 1)


def fuss_catalan(delta: int, v: int) -> Fraction:
    return Fraction(math.comb(delta * v, v), (delta - 1) * v + 1)


def check_tree_lemma(G: Graph, root: int, h: int, budget: int = 10**7) -> AuditReport:
    """#connected h-edge subgraphs of G containing root < (e*Delta)^h."""
    delta = int(G.degrees().max())
    lo, hi = e_power_bound(delta, h)
    if hi > budget:
        raise ValueError(f"(e*{delta})^{h} exceeds the enumeration budget {budget}")
    lhs = count_connected_subgraphs(graph_neighbors(G), root, h)
    return AuditReport("tree_lemma", {"n": G.n, "delta": delta, "root": root, "h": h}, lhs, (lo, hi), lhs < lo)


def check_subtree_formula(delta: int, v: int) -> AuditReport:
    lhs = rooted_subtree_count(delta, v)
    rhs = fuss_catalan(delta, v)
    return AuditReport("subtree_formula", {"delta": delta, "v": v}, lhs, rhs, lhs == rhs)


# ---------------------------------------------------------------------------
# vertex/edge/component inequality


def check_ivc(n: int, I: EdgeSet, host: Optional[CyclicOrdering] = None) -> AuditReport:
    """l <= 2v - 3c for I inside a copy with l <= n/3."""
    l, c, v = stats(I)
    if 3 * l > n:
        raise ValueError(f"l={l} exceeds n/3 for n={n}")
    if host is not None and not I.issubset(power_edges(host)):
        raise ValueError("I is not contained in the given copy")
    return AuditReport("ivc", {"n": n, "l": l, "c": c, "v": v}, l, 2 * v - 3 * c, l <= 2 * v - 3 * c)


def audit_ivc(n: int, max_l: Optional[int] = None, S: Optional[CyclicOrdering] = None) -> list[AuditReport]:
    S = S or CyclicOrdering.identity(n)
    max_l = n // 3 if max_l is None else max_l
    idx = power_edges(S).indices()
    return [check_ivc(n, EdgeSet.from_indices(n, combo)) for combo in _subsets_upto(idx, max_l)]


# ---------------------------------------------------------------------------
# overlap histogram and the high-overlap expectation


def overlap_histogram(n: int, S: Optional[CyclicOrdering] = None) -> OverlapHistogram:
    """Counts of copies J by |J ∩ S| (S defaults to the identity ordering)."""
    S = S or CyclicOrdering.identity(n)
    cat = enumerate_copies(n)
    ov = kernels.overlap_counts(cat.masks, power_edges(S).words())
    counts = np.bincount(ov, minlength=2 * n + 1)
    return OverlapHistogram(n, tuple(int(x) for x in counts))


def check_fi_bounds(n: int, hist: OverlapHistogram) -> list[AuditReport]:
    """f_i <= C(2n, i) q^i for ceil(n/3) <= i <= 2n, compared exactly."""
    reports = []
    f = hist.f
    with mpmath.workdps(30):
        q = q_value(n)
        for i in range(math.ceil(n / 3), 2 * n + 1):
            b = math.comb(2 * n, i)
            holds = at_most_q_power(f[i] / b, i, n)
            rhs = b * q**i
            scaled = float(f[i]) * n ** (i / 2)
            reports.append(
                AuditReport(
                    "fi_bound",
                    {"n": n, "i": i},
                    f[i],
                    mpmath.nstr(rhs, 30),
                    holds,
                    note=f"f_i*n^(i/2)={scaled:.6g}",
                )
            )
    return reports


def _check_wprime(n: int, w_prime: int) -> int:
    m = num_edges(n)
    if not 0 <= w_prime <= m - 2 * n:
        raise ValueError(f"w' must lie in [0, m-2n] = [0, {m - 2 * n}] for n={n}, got {w_prime}")
    return m


def expected_high_overlap(n: int, w_prime: int, k_cut: int, hist: OverlapHistogram) -> Fraction:
    """E|{J ⊆ Y ∪ S : |J ∩ S| >= k_cut}| for Y uniform from (M\\S choose w')."""
    m = _check_wprime(n, w_prime)
    total = Fraction(0)
    for i in range(max(k_cut, 0), 2 * n + 1):
        if hist.counts[i]:
            total += Fraction(hist.counts[i] * binom(w_prime, 2 * n - i), binom(m - 2 * n, 2 * n - i))
    return total


def expected_high_overlap_mc(
    n: int,
    w_prime: int,
    k_cut: int,
    samples: int,
    rng: RngStream,
    S: Optional[CyclicOrdering] = None,
    batch: int = 4096,
) -> tuple[float, float]:
    """Monte Carlo estimate (mean, standard error) by scanning the catalog."""
    _check_wprime(n, w_prime)
    S = S or CyclicOrdering.identity(n)
    cat = enumerate_copies(n)
    s_words = power_edges(S).words()
    ov = kernels.overlap_counts(cat.masks, s_words)
    rest = np.ascontiguousarray((cat.masks & ~s_words)[ov >= k_cut])
    outside = np.asarray((EdgeSet.full(n) - power_edges(S)).indices(), dtype=np.int64)
    gen = rng.generator()
    nwords = cat.masks.shape[1]
    vals = np.empty(samples, dtype=np.float64)
    done = 0
    while done < samples:
        b = min(batch, samples - done)
        ys = np.zeros((b, nwords), dtype=np.uint64)
        for t in range(b):
            for e in gen.choice(outside, size=w_prime, replace=False):
                ys[t, e >> 6] |= np.uint64(1) << np.uint64(e & 63)
        vals[done:done + b] = kernels.count_subsets_many(rest, ys)
        done += b
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0


def fiand_sides(n: int, w_prime: int, i: int) -> tuple[Fraction, Fraction]:
    m = num_edges(n)
    a = 2 * n - i
    if not 0 <= i <= 2 * n:
        raise ValueError(f"i must lie in [0, 2n], got {i}")
    if w_prime < 0 or a > m - 2 * n:
        raise ValueError(f"binomial C(m-2n, 2n-i) vanishes or w' < 0 (n={n}, w'={w_prime}, i={i})")
    lhs = Fraction(binom(w_prime, a), binom(m - 2 * n, a)) / Fraction(binom(w_prime + 2 * n, 2 * n), binom(m, 2 * n))
    rhs = (
        Fraction(falling(w_prime, a), falling(w_prime + 2 * n, a))
        * Fraction(falling(m, a), falling(m - 2 * n, a))
        * Fraction(falling(m - 2 * n + i, i), falling(w_prime + i, i))
    )
    return lhs, rhs


def check_fiand_ratio(n: int, w_prime: int, i: int) -> AuditReport:
    """Binomial ratio equals the falling-factorial product (an exact identity)."""
    lhs, rhs = fiand_sides(n, w_prime, i)
    return AuditReport("fiand_ratio", {"n": n, "w_prime": w_prime, "i": i}, lhs, rhs, lhs == rhs)


def spread_reports(n: int, sizes: Sequence[int]) -> list[AuditReport]:
    """The q-spread inequality per |I|, reported (not asserted) for small n."""
    total = count_copies(n)
    out = []
    for e in local_spread_profile(n, sizes):
        note = "reported only (n < 8)" if n < 8 else ""
        out.append(
            AuditReport(
                "spread",
                {"n": n, "size": e.size},
                Fraction(e.max_count, total),
                f"q^{e.size}",
                not e.exceeds_q,
                note,
            )
        )
    return out
