"""Exact and certified arithmetic shared by the audits and experiments."""
from __future__ import annotations

import math
from fractions import Fraction

import mpmath
from mpmath import iv
from scipy.stats import binomtest

DIGITS = 30


def _mpf_tuple_to_fraction(t) -> Fraction:
    sign, man, exp, _ = t
    v = Fraction(int(man)) * (Fraction(2) ** exp)
    return -v if sign else v


def interval_bounds(x) -> tuple[Fraction, Fraction]:
    """Exact rational endpoints of an mpmath interval."""
    a, b = x._mpi_
    return _mpf_tuple_to_fraction(a), _mpf_tuple_to_fraction(b)


def e_power_bound(mult: int, power: int, factor: int = 1) -> tuple[Fraction, Fraction]:
    """Certified enclosure [lo, hi] of factor * (mult * e) ** power."""
    saved = iv.dps
    iv.dps = DIGITS
    try:
        x = (iv.mpf(mult) * iv.e) ** power * iv.mpf(factor)
        return interval_bounds(x)
    finally:
        iv.dps = saved


def q_exact_power(n: int) -> Fraction:
    """q^(2n) = 2/(n-1)! exactly."""
    return Fraction(2, math.factorial(n - 1))


def q_value(n: int, dps: int = 40) -> mpmath.mpf:
    with mpmath.workdps(dps):
        return +(mpmath.mpf(2) / mpmath.factorial(n - 1)) ** (mpmath.mpf(1) / (2 * n))


def at_most_q_power(x: Fraction, s: int, n: int) -> bool:
    """Exact test of x <= q^s for x >= 0, via x^(2n) <= (2/(n-1)!)^s."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    return x ** (2 * n) <= q_exact_power(n) ** s


def falling(x: int, j: int) -> int:
    """Falling factorial (x)_j."""
    out = 1
    for t in range(j):
        out *= x - t
    return out


def binom(a: int, b: int) -> int:
    return math.comb(a, b) if 0 <= b <= a else 0


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    ci = binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)
