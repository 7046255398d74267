"""Monte Carlo containment probabilities over a grid of C = p * sqrt(n)."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import mpmath
import numpy as np
from scipy.optimize import minimize

from .graph_core import RngStream, random_uniforms, threshold_graph
from .numerics import q_value, wilson_interval
from .solver import EXHAUSTED, FOUND, SearchBudget, find_power_ham

MAX_GRID_N = 48


@dataclass(frozen=True)
class ThresholdGrid:
    n_values: tuple[int, ...]
    c_values: tuple[float, ...]
    trials: int
    master_seed: int
    budget: SearchBudget = SearchBudget(node_limit=10**8, time_limit=60.0)
    coupled: bool = True
    k: int = 2

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "c_values", tuple(float(c) for c in self.c_values))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if any(b <= a for a, b in zip(self.c_values, self.c_values[1:])):
            raise ValueError("C values must be strictly increasing")
        if any(c < 0 for c in self.c_values):
            raise ValueError("C values must be nonnegative")
        for n in self.n_values:
            if not 3 <= n <= MAX_GRID_N:
                raise ValueError(f"n={n} outside the supported range [3, {MAX_GRID_N}]")


@dataclass(frozen=True)
class CellResult:
    n: int
    C: float
    p: float
    trials: int
    successes: int
    failures: int
    unknowns: int

    @property
    def estimate(self) -> float:
        resolved = self.successes + self.failures
        return self.successes / resolved if resolved else float("nan")

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.successes, self.successes + self.failures)

    def row(self) -> list:
        lo, hi = self.ci
        return [self.n, self.C, repr(self.p), self.trials, self.successes, self.failures, self.unknowns,
                repr(self.estimate), repr(lo), repr(hi)]


GRID_HEADER = ["n", "C", "p", "trials", "successes", "failures", "unknowns", "estimate", "ci_lo", "ci_hi"]


def edge_probability(n: int, C: float) -> float:
    return min(1.0, C / math.sqrt(n))


def _trial_outcomes(n: int, trial: int, grid: ThresholdGrid) -> list[str]:
    """Solver status for one trial at every C of the grid."""
    out = []
    if grid.coupled:
        # one uniform per edge, shared across C: G(C) grows with C
        stream = RngStream(grid.master_seed, (n << 32) | trial)
        u = random_uniforms(n, stream)
        for C in grid.c_values:
            g = threshold_graph(n, u, edge_probability(n, C))
            out.append(find_power_ham(g, grid.k, grid.budget, stream.child(1)).status)
    else:
        for ci, C in enumerate(grid.c_values):
            stream = RngStream(grid.master_seed, (n << 32) | trial).child(ci)
            g = threshold_graph(n, random_uniforms(n, stream), edge_probability(n, C))
            out.append(find_power_ham(g, grid.k, grid.budget, stream.child(1)).status)
    return out


def _run_chunk(args):
    n, lo, hi, grid = args
    return n, [_trial_outcomes(n, t, grid) for t in range(lo, hi)]


def trial_matrix(grid: ThresholdGrid, workers: int = 1) -> dict[int, list[list[str]]]:
    """Per-n matrix of statuses indexed [trial][C index].

    Trials are split into chunks so that ``workers`` processes share the work
    even for a single n; chunks are reassembled in trial order.
    """
    if workers > 1:
        size = max(1, -(-grid.trials // (4 * workers)))
        jobs = [(n, lo, min(lo + size, grid.trials), grid) for n in grid.n_values for lo in range(0, grid.trials, size)]
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk((n, 0, grid.trials, grid)) for n in grid.n_values]
    out: dict[int, list[list[str]]] = {n: [] for n in grid.n_values}
    for n, rows in parts:
        out[n].extend(rows)
    return out


def run_grid(grid: ThresholdGrid, workers: int = 1) -> list[CellResult]:
    mats = trial_matrix(grid, workers)
    cells = []
    for n in grid.n_values:
        mat = mats[n]
        for ci, C in enumerate(grid.c_values):
            col = [row[ci] for row in mat]
            cells.append(
                CellResult(
                    n,
                    C,
                    edge_probability(n, C),
                    grid.trials,
                    col.count(FOUND),
                    col.count(EXHAUSTED),
                    len(col) - col.count(FOUND) - col.count(EXHAUSTED),
                )
            )
    return cells


def count_inversions(matrix: Sequence[Sequence[str]]) -> int:
    """Trials where a copy found at some C is missing at a larger C."""
    bad = 0
    for row in matrix:
        seen = False
        for s in row:
            if s == FOUND:
                seen = True
            elif seen and s == EXHAUSTED:
                bad += 1
    return bad


@dataclass(frozen=True)
class CrossingFit:
    n: int
    C_half: Optional[float]
    intercept: Optional[float]
    slope: Optional[float]
    flag: str  # ok | low_confidence | extrapolated | separated | no_fit
    deviance: Optional[float] = None

    def to_json(self) -> dict:
        return {"n": self.n, "C_half": self.C_half, "slope": self.slope, "flag": self.flag}


def fit_crossing(cells: Sequence[CellResult]) -> CrossingFit:
    """Maximum-likelihood logistic fit of P(success) against log C.

    The model is P = 1 / (1 + exp(-slope * (log C - log C_half))).
    """
    cells = [c for c in cells if c.successes + c.failures > 0 and c.C > 0]
    if not cells:
        raise ValueError("no resolved cells with C > 0")
    n = cells[0].n
    if any(c.n != n for c in cells):
        raise ValueError("cells must share a single n")
    x = np.log([c.C for c in cells])
    s = np.array([c.successes for c in cells], dtype=float)
    f = np.array([c.failures for c in cells], dtype=float)
    rates = s / (s + f)
    if np.all(rates == 0) or np.all(rates == 1):
        return CrossingFit(n, None, None, None, "no_fit")

    def nll(theta):
        a, b = theta
        z = a + b * x
        # -log-likelihood of binomial counts, written stably
        return float(np.sum(s * np.logaddexp(0, -z) + f * np.logaddexp(0, z)))

    b0 = 4.0
    a0 = -b0 * float(np.mean(x))
    res = minimize(nll, x0=[a0, b0], method="L-BFGS-B", bounds=[(-1e4, 1e4), (-1e3, 1e3)])
    a, b = (float(v) for v in res.x)
    if b == 0:
        return CrossingFit(n, None, a, b, "no_fit", 2 * res.fun)
    log_half = -a / b
    c_half = math.exp(log_half)
    interior = int(np.count_nonzero((rates > 0) & (rates < 1)))
    separated = bool(np.all(np.diff(rates[np.argsort(x)]) >= 0)) and interior == 0
    if separated:
        flag = "separated"
    elif not (x.min() <= log_half <= x.max()):
        flag = "extrapolated"
    elif interior < 4:
        flag = "low_confidence"
    else:
        flag = "ok"
    return CrossingFit(n, c_half, a, b, flag, 2 * res.fun)


@dataclass(frozen=True)
class FirstMoment:
    n: int
    p: Fraction
    expected_copies: Fraction
    q: mpmath.mpf
    q_sqrt_n: mpmath.mpf
    sqrt_e: mpmath.mpf


def first_moment_curve(n: int, p, k: int = 2) -> FirstMoment:
    """Expected number of copies (n-1)! p^(kn) / 2, exactly for rational p.

    Also reports the point q where the expectation equals 1 (for k = 2) and
    q * sqrt(n), which tends to sqrt(e).
    """
    if n < 3:
        raise ValueError("need n >= 3")
    p = Fraction(p)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    expected = Fraction(math.factorial(n - 1), 2) * p ** (k * n)
    with mpmath.workdps(40):
        q = q_value(n) if k == 2 else +(mpmath.mpf(2) / mpmath.factorial(n - 1)) ** (mpmath.mpf(1) / (k * n))
        return FirstMoment(n, p, expected, q, q * mpmath.sqrt(n), mpmath.sqrt(mpmath.e))
