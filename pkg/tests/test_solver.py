import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hc2lab.copies import CyclicOrdering, power_edges, random_copy
from hc2lab.graph_core import EdgeSet, Graph, RngStream, num_edges, sample_gnm, sample_gnp
from hc2lab.solver import (
    EXHAUSTED,
    FOUND,
    UNKNOWN,
    SearchBudget,
    SearchIncomplete,
    contains_copy_catalog,
    find_min_fragment,
    find_power_ham,
    min_fragment,
    min_fragment_catalog,
)

PETERSEN = [(i, (i + 1) % 5) for i in range(5)] + [(i, i + 5) for i in range(5)] + [
    (5 + i, 5 + (i + 2) % 5) for i in range(5)
]


def square(n, order=None):
    o = CyclicOrdering.identity(n) if order is None else CyclicOrdering.of(order)
    return Graph(n, power_edges(o))


def test_square_itself_found():
    g = square(9)
    out = find_power_ham(g)
    assert out.status == FOUND
    assert power_edges(out.witness) == g.edges


def test_shuffled_square_found():
    perm = list(RngStream(3).generator().permutation(12))
    g = square(12, perm)
    out = find_power_ham(g, rng=RngStream(1))
    assert out.status == FOUND
    assert out.witness == CyclicOrdering.of(perm)


@pytest.mark.parametrize("n", [8, 9, 10])
def test_square_minus_any_edge(n):
    full = power_edges(CyclicOrdering.identity(n))
    for e in full.indices():
        g = Graph(n, full - EdgeSet.from_indices(n, [e]))
        assert find_power_ham(g).status == EXHAUSTED


def test_petersen_and_k5():
    assert find_power_ham(Graph.from_edges(10, PETERSEN)).status == EXHAUSTED
    assert find_power_ham(Graph.complete(5)).status == FOUND


def test_complete_graphs_found():
    for n in (3, 4, 6, 13, 30):
        assert find_power_ham(Graph.complete(n)).status == FOUND


def test_k1_is_hamilton_cycle():
    cyc = Graph.from_edges(7, [(i, (i + 1) % 7) for i in range(7)])
    assert find_power_ham(cyc, k=1).status == FOUND
    assert find_power_ham(cyc, k=2).status == EXHAUSTED
    path = Graph.from_edges(7, [(i, i + 1) for i in range(6)])
    assert find_power_ham(path, k=1).status == EXHAUSTED


def test_small_n_rejected():
    with pytest.raises(ValueError):
        find_power_ham(Graph.complete(2))


def test_budget_gives_unknown_not_no():
    g = sample_gnp(30, 0.55, RngStream(6))
    out = find_power_ham(g, budget=SearchBudget(node_limit=5, time_limit=10))
    assert out.status in (UNKNOWN, FOUND)
    if out.status == UNKNOWN:
        assert out.witness is None


def test_deterministic_given_rng():
    g = sample_gnp(14, 0.7, RngStream(2))
    a = find_power_ham(g, rng=RngStream(5))
    b = find_power_ham(g, rng=RngStream(5))
    assert (a.status, a.witness, a.nodes) == (b.status, b.witness, b.nodes)


@settings(max_examples=60, deadline=None)
@given(st.integers(6, 8), st.floats(0.4, 0.95), st.integers(0, 10**6), st.booleans())
def test_agrees_with_catalog(n, p, seed, prune):
    g = sample_gnp(n, p, RngStream(seed))
    out = find_power_ham(g, rng=RngStream(seed, 1), prune=prune)
    assert (out.status == FOUND) == contains_copy_catalog(g)
    if out.status == FOUND:
        assert power_edges(out.witness).issubset(g.edges)


def test_pruning_never_changes_decisions():
    for t in range(80):
        g = sample_gnp(9, 0.75, RngStream(77, t))
        a = find_power_ham(g, prune=True).status
        b = find_power_ham(g, prune=False).status
        assert a == b


def test_fragment_zero_when_copy_in_w():
    n = 8
    S = CyclicOrdering.identity(n)
    J = random_copy(n, RngStream(4))
    W = power_edges(J) | EdgeSet.from_indices(n, [0, 5])
    assert min_fragment(S, W) == 0


@pytest.mark.parametrize("n", [7, 8, 9, 10])
def test_fragment_of_empty_w_is_whole_copy(n):
    S = random_copy(n, RngStream(n))
    assert min_fragment(S, EdgeSet(n, 0), cap=2 * n) == 2 * n
    assert min_fragment(S, EdgeSet(n, 0), cap=2 * n - 1) is None


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 28), st.integers(0, 16))
def test_fragment_matches_catalog_8(seed, w_size, cap):
    n = 8
    r = RngStream(seed)
    S = random_copy(n, r.child(0))
    W = sample_gnm(n, w_size, r.child(1)).edges
    assert min_fragment(S, W, cap=cap) == min_fragment_catalog(S, W, cap=cap)


def test_fragment_large_w_8():
    # a W of 3 n^(3/2) edges exceeds C(8, 2); it saturates at K_8
    n = 8
    w_size = min(math.ceil(3 * n**1.5), num_edges(n))
    for t in range(5):
        r = RngStream(21, t)
        S = random_copy(n, r.child(0))
        W = sample_gnm(n, w_size, r.child(1)).edges
        assert min_fragment(S, W, cap=2 * n) == min_fragment_catalog(S, W, cap=2 * n) == 0


def test_fragment_zero_iff_copy_inside_w():
    n = 8
    for t in range(40):
        r = RngStream(31, t)
        S = random_copy(n, r.child(0))
        W = sample_gnm(n, 20, r.child(1)).edges
        zero = min_fragment(S, W) == 0
        assert zero == contains_copy_catalog(Graph(n, W))


def test_fragment_witness_cost():
    n = 9
    r = RngStream(8)
    S = random_copy(n, r.child(0))
    W = sample_gnm(n, 22, r.child(1)).edges
    res = find_min_fragment(S, W)
    assert res.status == FOUND
    J = power_edges(res.witness)
    assert J.issubset(power_edges(S) | W)
    assert len(J - W) == res.size


def test_fragment_budget_raises():
    n = 30
    S = CyclicOrdering.identity(n)
    W = sample_gnp(n, 0.5, RngStream(1)).edges
    with pytest.raises(SearchIncomplete):
        min_fragment(S, W, budget=SearchBudget(node_limit=3))
