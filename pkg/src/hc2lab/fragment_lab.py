"""Two-round exposure, good/bad pairs, fragment families and the second moment.

Bulk classification over the whole copy hypergraph uses the catalog kernel
:func:`classify_all`; single pairs go through the backtracking search in
:mod:`hc2lab.solver`. The two routes are cross-checked in the tests.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import mpmath
import numpy as np

from . import kernels
from .copies import CyclicOrdering, count_copies, enumerate_copies, power_edges, random_copy
from .graph_core import EdgeSet, Graph, RngStream, num_edges, sample_gnm, sample_gnp
from .numerics import binom, wilson_interval
from .solver import FOUND, UNKNOWN, SearchBudget, find_min_fragment, find_power_ham


@dataclass(frozen=True)
class TwoRoundPlan:
    n: int
    c0_surrogate: float = 3.0
    C: float = 2.0
    k: Optional[int] = None
    w: Optional[int] = None

    def __post_init__(self):
        if self.k is None:
            object.__setattr__(self, "k", math.ceil(4 * math.sqrt(self.n)))
        if self.w is None:
            object.__setattr__(self, "w", math.ceil(self.C * self.n**1.5))
        for name in ("p0", "p1"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name}={val} lies outside [0, 1]")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.w < 0:
            raise ValueError("w must be >= 0")

    @property
    def p0(self) -> float:
        return self.c0_surrogate / math.sqrt(self.n)

    @property
    def p1(self) -> float:
        return self.C / math.sqrt(self.n)

    @property
    def p(self) -> float:
        return self.p0 + self.p1 - self.p0 * self.p1

    @property
    def m(self) -> int:
        return num_edges(self.n)

    @property
    def w_effective(self) -> int:
        """w clamped to |M|; C n^(3/2) exceeds C(n,2) once C > sqrt(n)/2."""
        return min(self.w, self.m)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "c0_surrogate": self.c0_surrogate,
            "C": self.C,
            "k": self.k,
            "w": self.w,
            "w_effective": self.w_effective,
            "p0": self.p0,
            "p1": self.p1,
            "p": self.p,
        }


@dataclass(frozen=True)
class PairClassification:
    S: CyclicOrdering
    W: EdgeSet
    min_fragment_size: Optional[int]  # None: every fragment is larger than k
    good: bool
    resolved: bool = True


def classify_pair(S: CyclicOrdering, W: EdgeSet, k: int, budget: Optional[SearchBudget] = None) -> PairClassification:
    """(S, W) is good when some (S, W)-fragment has at most k edges."""
    res = find_min_fragment(S, W, 2, cap=k, budget=budget)
    if res.status == UNKNOWN:
        return PairClassification(S, W, None, False, resolved=False)
    return PairClassification(S, W, res.size, res.size is not None)


def classify_all(W: EdgeSet, k: int, s_rows: Optional[np.ndarray] = None) -> tuple[np.ndarray, np.ndarray]:
    """Minimum fragment size (or -1 when > k) and witness copy index for every S.

    For a copy J, J ⊆ S ∪ W exactly when J \\ W ⊆ S, so each S needs the
    smallest J \\ W it contains; candidates are scanned in size order.
    """
    cat = enumerate_copies(W.n)
    w = W.words()
    d = cat.masks & ~w
    sizes = np.bitwise_count(d).sum(axis=1, dtype=np.int64)
    order = np.argsort(sizes, kind="stable")
    s_masks = cat.masks if s_rows is None else cat.masks[s_rows]
    best, arg = kernels.min_fragment_batch(
        np.ascontiguousarray(s_masks), np.ascontiguousarray(d[order]), sizes[order], int(k)
    )
    witness = np.where(arg >= 0, order[np.maximum(arg, 0)], -1)
    return best, witness


# ---------------------------------------------------------------------------
# censuses


@dataclass(frozen=True)
class CensusResult:
    trials: int
    bad: int
    good: int
    unresolved: int
    fraction: float
    ci: tuple[float, float]
    paper_bound: float
    t_histogram: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "bad": self.bad,
            "good": self.good,
            "unresolved": self.unresolved,
            "bad_fraction": self.fraction,
            "ci": list(self.ci),
            "bound_2C^(-k/3)": self.paper_bound,
            "t_histogram": {str(t): v for t, v in sorted(self.t_histogram.items())},
        }


def bad_pair_census(
    plan: TwoRoundPlan, trials: int, seed: int, budget: Optional[SearchBudget] = None
) -> CensusResult:
    """Fraction of bad (S, W) with S uniform in the copy hypergraph and W uniform of size w."""
    n, k = plan.n, plan.k
    bad = good = unresolved = 0
    t_hist: dict[int, list[int]] = {}
    for t in range(trials):
        stream = RngStream(seed, t)
        S = random_copy(n, stream.child(0))
        W = sample_gnm(n, plan.w_effective, stream.child(1)).edges
        cls = classify_pair(S, W, k, budget)
        overlap = len(W & power_edges(S))
        row = t_hist.setdefault(overlap, [0, 0])
        row[1] += 1
        if not cls.resolved:
            unresolved += 1
        elif cls.good:
            good += 1
        else:
            bad += 1
            row[0] += 1
    resolved = bad + good
    frac = bad / resolved if resolved else float("nan")
    return CensusResult(
        trials,
        bad,
        good,
        unresolved,
        frac,
        wilson_interval(bad, resolved),
        2 * plan.C ** (-k / 3),
        {t: tuple(v) for t, v in t_hist.items()},
    )


@dataclass(frozen=True)
class W0Success:
    successful: bool
    bad: int
    total: int
    bad_fraction: float
    ci: tuple[float, float]
    exact: bool


def successful_w0(
    W0: EdgeSet, k: int, mode: str = "exact", samples: int = 1000, rng: Optional[RngStream] = None
) -> W0Success:
    """W0 is successful when at most half of all S form a bad pair with it."""
    n = W0.n
    total = count_copies(n)
    if mode == "exact":
        best, _ = classify_all(W0, k)
        bad = int(np.count_nonzero(best < 0))
        return W0Success(2 * bad <= total, bad, total, bad / total, (bad / total, bad / total), True)
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    if rng is None:
        raise ValueError("sampled mode needs an rng")
    bad = 0
    for t in range(samples):
        S = random_copy(n, rng.child(t))
        bad += not classify_pair(S, W0, k).good
    frac = bad / samples
    return W0Success(frac <= 0.5, bad, samples, frac, wilson_interval(bad, samples), False)


# ---------------------------------------------------------------------------
# fragment family and second moment


@dataclass(frozen=True, eq=False)
class FragmentFamily:
    """The k-uniform multihypergraph of chosen k-subsets chi(S, W0)."""

    n: int
    k: int
    members: np.ndarray  # (N, W) uint64
    sources: np.ndarray  # catalog index of S per member
    fragments: np.ndarray  # (N, W) uint64, the fragment contained in each member

    def __len__(self) -> int:
        return self.members.shape[0]

    def member(self, i: int) -> EdgeSet:
        return EdgeSet.from_words(self.n, self.members[i])


def pad_fragment(S_edges: EdgeSet, fragment: EdgeSet, k: int) -> EdgeSet:
    """Extend ``fragment`` to k edges of S using the lexicographically least extras."""
    if not fragment.issubset(S_edges):
        raise ValueError("fragment is not inside S")
    if len(fragment) > k or len(S_edges) < k:
        raise ValueError("cannot pad to k edges")
    extra = (S_edges - fragment).indices()[: k - len(fragment)]
    return fragment | EdgeSet.from_indices(S_edges.n, extra)


def build_fragment_family(W0: EdgeSet, k: int, s_rows: Optional[Sequence[int]] = None) -> FragmentFamily:
    """chi(S, W0) for every good S (all copies, or the catalog rows ``s_rows``)."""
    n = W0.n
    cat = enumerate_copies(n)
    if k > 2 * n:
        raise ValueError("k exceeds the number of edges of a copy")
    rows = np.arange(len(cat)) if s_rows is None else np.asarray(s_rows, dtype=np.int64)
    best, witness = classify_all(W0, k, rows)
    good = best >= 0
    src = rows[good]
    frags = np.ascontiguousarray(cat.masks[witness[good]] & ~W0.words())
    members = kernels.pad_lowest(frags, np.ascontiguousarray(cat.masks[src]), int(k))
    return FragmentFamily(n, k, members, src.astype(np.int64), frags)


@dataclass(frozen=True)
class SecondMomentReport:
    size: int
    k: int
    p1: Fraction
    mu: Fraction
    exact_mean: Fraction
    exact_variance: Fraction
    var_bound: Fraction
    chebyshev_bound: Optional[Fraction]
    intersection_hist: tuple[int, ...]
    empirical_p_x0: Optional[float] = None
    empirical_se: Optional[float] = None
    simulations: int = 0

    @property
    def variance_ok(self) -> bool:
        return self.exact_variance <= self.var_bound

    def to_json(self) -> dict:
        return {
            "family_size": self.size,
            "k": self.k,
            "p1": float(self.p1),
            "mu": float(self.mu),
            "exact_mean": float(self.exact_mean),
            "exact_variance": float(self.exact_variance),
            "var_bound": float(self.var_bound),
            "variance_within_bound": self.variance_ok,
            "chebyshev_bound": None if self.chebyshev_bound is None else float(self.chebyshev_bound),
            "empirical_p_x0": self.empirical_p_x0,
            "empirical_se": self.empirical_se,
            "simulations": self.simulations,
        }


def bernoulli_masks(n: int, p: float, draws: int, gen: np.random.Generator) -> np.ndarray:
    """``draws`` independent G(n, p) edge sets in kernel layout."""
    m = num_edges(n)
    nw = max(1, -(-m // 64))
    out = np.zeros((draws, nw), dtype=np.uint64)
    hits = gen.random((draws, m)) < p
    for e in range(m):
        out[:, e >> 6] |= hits[:, e].astype(np.uint64) << np.uint64(e & 63)
    return out


def second_moment(
    family: FragmentFamily, p1, simulations: int = 0, rng: Optional[RngStream] = None
) -> SecondMomentReport:
    """Exact mean/variance of X = #{A in R : A ⊆ W1} for W1 ~ G(n, p1)."""
    p = Fraction(p1)
    k = family.k
    N = len(family)
    mu = N * p**k
    sizes = np.bitwise_count(family.members).sum(axis=1) if N else np.zeros(0, dtype=np.int64)
    exact_mean = sum((p ** int(s) for s in sizes), Fraction(0))
    hist = kernels.pair_intersection_hist(np.ascontiguousarray(family.members), k) if N else np.zeros(k + 1, np.int64)
    # E X^2 = sum over ordered pairs of p^{|A ∪ B|}, |A ∪ B| = 2k - |A ∩ B|
    second = sum((int(hist[j]) * p ** (2 * k - j) for j in range(k + 1)), Fraction(0))
    variance = second - exact_mean**2
    var_bound = p ** (2 * k) * sum((int(hist[j]) / p**j for j in range(1, k + 1)), Fraction(0)) if p else Fraction(0)
    cheb = variance / mu**2 if mu > 0 else None
    emp = se = None
    if simulations:
        if rng is None:
            raise ValueError("simulation needs an rng")
        ys = bernoulli_masks(family.n, float(p), simulations, rng.generator())
        X = kernels.count_subsets_many(np.ascontiguousarray(family.members), ys) if N else np.zeros(simulations)
        zero = X == 0
        emp = float(zero.mean())
        se = float(math.sqrt(max(emp * (1 - emp), 1e-300) / simulations))
    return SecondMomentReport(
        N, k, p, mu, exact_mean, variance, var_bound, cheb, tuple(int(x) for x in hist), emp, se, simulations
    )


# ---------------------------------------------------------------------------
# pathological sets


@dataclass(frozen=True)
class PathologicalCensus:
    copies_inside: int
    bad: int
    unresolved: int
    threshold: mpmath.mpf
    pathological: bool


def pathological_threshold(n: int, k: int, C: float, w_prime: int) -> mpmath.mpf:
    m = num_edges(n)
    with mpmath.workdps(30):
        return +(
            mpmath.mpf(C) ** (-mpmath.mpf(k) / 3)
            * count_copies(n)
            * binom(w_prime + 2 * n, 2 * n)
            / binom(m, 2 * n)
        )


def pathological_census(
    Z: EdgeSet, k: int, C: float, w_prime: int, budget: Optional[SearchBudget] = None
) -> PathologicalCensus:
    """Count S ⊆ Z with (S, Z \\ S) bad and compare against the census threshold."""
    n = Z.n
    if len(Z) != w_prime + 2 * n:
        raise ValueError(f"|Z|={len(Z)} but w'+2n={w_prime + 2 * n}")
    cat = enumerate_copies(n)
    inside = np.flatnonzero(np.all((cat.masks & ~Z.words()) == 0, axis=1))
    bad = unresolved = 0
    for r in inside:
        S = cat.ordering(int(r))
        cls = classify_pair(S, Z - power_edges(S), k, budget)
        if not cls.resolved:
            unresolved += 1
        elif not cls.good:
            bad += 1
    thr = pathological_threshold(n, k, C, w_prime)
    return PathologicalCensus(len(inside), bad, unresolved, thr, bad > thr)


# ---------------------------------------------------------------------------
# end-to-end two-round experiment


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    w0_size: int
    w0_successful: bool
    bad_fraction: float
    family_size: int
    X: int
    solver_status: str
    seconds: float

    @property
    def sound(self) -> bool:
        return self.X == 0 or self.solver_status == FOUND

    def row(self) -> list:
        return [self.trial, self.w0_size, self.w0_successful, self.family_size, self.X, self.solver_status, f"{self.seconds:.6f}"]


TRIAL_HEADER = ["trial", "w0_size", "w0_successful", "family_size", "X", "solver_status", "seconds"]


def two_round_trial(plan: TwoRoundPlan, seed: int, trial: int, budget: Optional[SearchBudget] = None) -> TrialRecord:
    t0 = time.perf_counter()
    n, k = plan.n, plan.k
    stream = RngStream(seed, trial)
    W0 = sample_gnp(n, plan.p0, stream.child(0)).edges
    best, _ = classify_all(W0, k)
    total = best.shape[0]
    bad = int(np.count_nonzero(best < 0))
    family = build_fragment_family(W0, k)
    W1 = sample_gnp(n, plan.p1, stream.child(1)).edges
    X = int(kernels.count_subsets_many(np.ascontiguousarray(family.members), W1.words()[None, :])[0]) if len(family) else 0
    outcome = find_power_ham(Graph(n, W0 | W1), 2, budget, stream.child(2))
    return TrialRecord(
        trial, len(W0), 2 * bad <= total, bad / total, len(family), X, outcome.status, time.perf_counter() - t0
    )


def two_round_experiment(
    plan: TwoRoundPlan, trials: int, seed: int, budget: Optional[SearchBudget] = None
) -> list[TrialRecord]:
    """Independent two-round trials, one random stream per trial index."""
    return [two_round_trial(plan, seed, t, budget) for t in range(trials)]
