import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hc2lab import fragment_lab as fl
from hc2lab.copies import CyclicOrdering, count_copies, enumerate_copies, power_edges, random_copy
from hc2lab.graph_core import EdgeSet, RngStream, num_edges, sample_gnm, sample_gnp
from hc2lab.solver import FOUND, min_fragment_catalog


def _family_from(members, n=8, k=3):
    words = np.stack([m.words() for m in members]) if members else np.zeros((0, 1), np.uint64)
    return fl.FragmentFamily(n, k, words, np.zeros(len(members), np.int64), words.copy())


# --- plan --------------------------------------------------------------------


def test_plan_defaults():
    plan = fl.TwoRoundPlan(9)
    assert plan.k == 12
    assert plan.w == math.ceil(2 * 27)
    assert plan.w_effective == 36
    assert plan.p0 == 1.0
    assert abs(plan.p - (plan.p0 + plan.p1 - plan.p0 * plan.p1)) < 1e-15


def test_plan_rejects_probability_above_one():
    with pytest.raises(ValueError):
        fl.TwoRoundPlan(4, c0_surrogate=3.0)


# --- classification ----------------------------------------------------------


def test_classify_w_containing_copy():
    n = 8
    W = power_edges(random_copy(n, RngStream(3)))
    c = fl.classify_pair(CyclicOrdering.identity(n), W, 4)
    assert c.min_fragment_size == 0 and c.good


def test_classify_empty_w():
    n = 8
    c = fl.classify_pair(CyclicOrdering.identity(n), EdgeSet(n, 0), 2 * n - 1)
    assert c.min_fragment_size is None and not c.good


def test_classify_matches_catalog_8():
    n, k = 8, 6
    w = math.ceil(2 * n**1.5)  # 46 > C(8, 2): saturates
    assert w > num_edges(n)
    for size in (12, 16, 20, num_edges(n)):
        for t in range(25):
            r = RngStream(100 + size, t)
            S = random_copy(n, r.child(0))
            W = sample_gnm(n, size, r.child(1)).edges
            c = fl.classify_pair(S, W, k)
            want = min_fragment_catalog(S, W, cap=k)
            assert c.min_fragment_size == want
            assert c.good == (want is not None)


def test_classify_all_matches_search():
    n, k = 8, 8
    W = sample_gnm(n, 14, RngStream(9)).edges
    best, witness = fl.classify_all(W, k)
    cat = enumerate_copies(n)
    for r in range(0, len(cat), 97):
        S = cat.ordering(r)
        c = fl.classify_pair(S, W, k)
        assert (best[r] if best[r] >= 0 else None) == c.min_fragment_size
        if best[r] >= 0:
            J = cat.edges(int(witness[r]))
            assert J.issubset(power_edges(S) | W)
            assert len(J - W) == best[r]


# --- censuses ----------------------------------------------------------------


def test_census_full_w_all_good():
    plan = fl.TwoRoundPlan(8, c0_surrogate=1.0, C=2.0, k=4)
    assert plan.w_effective == plan.m
    res = fl.bad_pair_census(plan, 20, seed=1)
    assert res.bad == 0 and res.fraction == 0.0


def test_census_empty_w_all_bad():
    plan = fl.TwoRoundPlan(8, c0_surrogate=1.0, C=2.0, k=6, w=0)
    res = fl.bad_pair_census(plan, 20, seed=1)
    assert res.good == 0 and res.fraction == 1.0


def test_census_nonincreasing_in_c():
    fracs = []
    for C in (1.0, 2.0, 3.0):
        plan = fl.TwoRoundPlan(9, c0_surrogate=1.0, C=C, k=8)
        fracs.append(fl.bad_pair_census(plan, 150, seed=7).fraction)
    assert fracs[0] >= fracs[1] >= fracs[2]


def test_census_reproducible():
    plan = fl.TwoRoundPlan(8, c0_surrogate=1.0, C=1.0, k=5)
    assert fl.bad_pair_census(plan, 30, 4) == fl.bad_pair_census(plan, 30, 4)


def test_successful_w0_extremes():
    n = 8
    full = fl.successful_w0(EdgeSet.full(n), 4)
    assert full.bad == 0 and full.successful
    empty = fl.successful_w0(EdgeSet(n, 0), 2 * n - 1)
    assert empty.bad == count_copies(n) and not empty.successful


def test_successful_w0_sampled_vs_exact():
    n, k = 8, 8
    W0 = sample_gnm(n, 14, RngStream(2)).edges
    ex = fl.successful_w0(W0, k)
    sm = fl.successful_w0(W0, k, mode="sampled", samples=200, rng=RngStream(3))
    lo, hi = sm.ci
    assert lo - 0.05 <= ex.bad_fraction <= hi + 0.05


# --- fragment family ---------------------------------------------------------


def test_family_when_w0_holds_a_copy():
    n, k = 8, 6
    W0 = power_edges(random_copy(n, RngStream(5)))
    fam = fl.build_fragment_family(W0, k)
    cat = enumerate_copies(n)
    assert len(fam) == len(cat)
    for i in range(0, len(fam), 211):
        S = cat.edges(int(fam.sources[i]))
        assert fam.member(i) == EdgeSet.from_indices(n, S.indices()[:k])


def test_family_empty_when_no_good_pairs():
    fam = fl.build_fragment_family(EdgeSet(8, 0), 6)
    assert len(fam) == 0


def test_family_members_verify():
    n, k = 8, 12
    W0 = sample_gnp(n, 0.4, RngStream(3)).edges
    fam = fl.build_fragment_family(W0, k)
    cat = enumerate_copies(n)
    assert len(fam) > 0
    for i in range(len(fam)):
        S = cat.edges(int(fam.sources[i]))
        A = fam.member(i)
        frag = EdgeSet.from_words(n, fam.fragments[i])
        assert len(A) == k and A.issubset(S) and frag.issubset(A)
        assert A == fl.pad_fragment(S, frag, k)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 16))
def test_pad_fragment_rule(seed, k):
    n = 8
    r = RngStream(seed)
    S = power_edges(random_copy(n, r))
    gen = r.child(1).generator()
    j = int(gen.integers(0, k + 1))
    frag = EdgeSet.from_indices(n, gen.choice(S.indices(), size=j, replace=False))
    A = fl.pad_fragment(S, frag, k)
    assert len(A) == k and frag <= A <= S
    extras = (A - frag).indices()
    rest = (S - A).indices()
    assert not extras or not rest or max(extras) < min(rest)


# --- second moment -----------------------------------------------------------


def test_single_member_mean():
    A = EdgeSet.from_indices(8, [0, 1, 2])
    rep = fl.second_moment(_family_from([A]), Fraction(1, 2))
    assert rep.mu == rep.exact_mean == Fraction(1, 8)
    assert rep.exact_variance == Fraction(1, 8) - Fraction(1, 64)


def test_disjoint_members_variance():
    A = EdgeSet.from_indices(8, [0, 1, 2])
    B = EdgeSet.from_indices(8, [5, 6, 7])
    p = Fraction(1, 3)
    rep = fl.second_moment(_family_from([A, B]), p)
    assert rep.exact_variance == 2 * (p**3 - p**6)
    # only the diagonal pairs intersect
    assert rep.intersection_hist[3] == 2 and rep.var_bound == 2 * p**3


def test_duplicate_members_are_a_multiset():
    A = EdgeSet.from_indices(8, [0, 1, 2])
    p = Fraction(1, 2)
    rep = fl.second_moment(_family_from([A, A]), p)
    # X = 2 * 1[A ⊆ W1]
    assert rep.exact_mean == 2 * p**3
    assert rep.exact_variance == 4 * (p**3 - p**6)


def test_variance_against_brute_force():
    # all 2^m outcomes of W1 on a tiny ground set
    n, k = 5, 2
    members = [EdgeSet.from_indices(n, s) for s in ([0, 1], [1, 2], [0, 1], [3, 4], [2, 9])]
    fam = fl.FragmentFamily(n, k, np.stack([m.words() for m in members]), np.zeros(5, np.int64),
                            np.stack([m.words() for m in members]))
    p = Fraction(2, 5)
    m = num_edges(n)
    EX = EX2 = Fraction(0)
    for mask in range(1 << m):
        x = sum(1 for A in members if A.bits & mask == A.bits)
        pr = p ** bin(mask).count("1") * (1 - p) ** (m - bin(mask).count("1"))
        EX += x * pr
        EX2 += x * x * pr
    rep = fl.second_moment(fam, p)
    assert rep.exact_mean == EX
    assert rep.exact_variance == EX2 - EX**2
    assert rep.variance_ok


def test_second_moment_seeded_family_8():
    n, k = 8, 12
    W0 = sample_gnp(n, 0.4, RngStream(3)).edges
    fam = fl.build_fragment_family(W0, k)
    p1 = 2 / math.sqrt(8)
    rep = fl.second_moment(fam, p1, simulations=3000, rng=RngStream(4))
    assert rep.variance_ok
    assert rep.empirical_p_x0 <= float(rep.chebyshev_bound) + 4 * rep.empirical_se


def test_bernoulli_masks_rate():
    gen = np.random.Generator(np.random.Philox(1))
    ys = fl.bernoulli_masks(9, 0.25, 4000, gen)
    rate = np.bitwise_count(ys).sum() / (4000 * 36)
    assert abs(rate - 0.25) < 0.01


# --- pathological sets -------------------------------------------------------


def test_pathological_no_copy():
    n = 8
    Z = EdgeSet.from_indices(n, range(20))  # edges at 0..4 mostly; check contents
    from hc2lab.solver import contains_copy_catalog
    from hc2lab.graph_core import Graph

    assert not contains_copy_catalog(Graph(n, Z))
    res = fl.pathological_census(Z, 6, 2.0, 20 - 2 * n)
    assert res.copies_inside == 0 and res.bad == 0 and not res.pathological


def test_pathological_full_z():
    n = 8
    res = fl.pathological_census(EdgeSet.full(n), 6, 2.0, num_edges(n) - 2 * n)
    assert res.copies_inside == count_copies(n)
    assert res.bad == 0 and not res.pathological


def test_pathological_size_check():
    with pytest.raises(ValueError):
        fl.pathological_census(EdgeSet.full(8), 6, 2.0, 3)


# --- two-round trials --------------------------------------------------------


def test_two_round_p0_one():
    plan = fl.TwoRoundPlan(9, c0_surrogate=3.0, C=2.0)
    recs = fl.two_round_experiment(plan, 3, seed=2)
    for r in recs:
        assert r.w0_size == 36 and r.w0_successful and r.solver_status == FOUND


def test_two_round_p1_zero():
    plan = fl.TwoRoundPlan(8, c0_surrogate=1.5, C=0.0, k=10)
    for r in fl.two_round_experiment(plan, 5, seed=3):
        assert r.X == 0 and r.sound


def test_two_round_sound_moderate():
    plan = fl.TwoRoundPlan(8, c0_surrogate=1.6, C=2.0, k=12)
    recs = fl.two_round_experiment(plan, 15, seed=11)
    assert all(r.sound for r in recs)
    assert any(r.X > 0 for r in recs)
