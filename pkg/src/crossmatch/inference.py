"""Exact null distribution and p-values for the cross-match count.

Under the null every assignment of the n zeros and m ones to the N pooled
points is equally likely, and the matching does not depend on the labels.
Counting labelings of a fixed matching with c1 mixed pairs gives::

    P(C = c1) = 2**c1 * (N/2)! / (binom(N, n) * c0! * c1! * c2!)

with c0 = (n - c1) / 2 and c2 = (m - c1) / 2. All probabilities are exact
``Fraction`` objects; floats appear only at reporting time. The factorial in
the numerator is (N/2)!, the number of pairs; for balanced groups (n == m)
this equals n!.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .core import DEFAULT_METRIC, Metric, PooledSample, build_distance_matrix
from .matching import count_pair_types, match_points


def _check_sizes(n: int, m: int) -> None:
    if n < 0 or m < 0:
        raise ValueError("group sizes must be non-negative")
    if (n + m) % 2:
        raise ValueError(f"n + m must be even (got {n} + {m}); pad odd samples first")
    if n + m < 2:
        raise ValueError("need at least one pair")


def support(n: int, m: int) -> tuple[int, ...]:
    _check_sizes(n, m)
    return tuple(range(n % 2, min(n, m) + 1, 2))


def null_pmf(n: int, m: int, c1: int) -> Fraction:
    """Exact P(C = c1) for groups of size n and m; zero off the support."""
    _check_sizes(n, m)
    if c1 < 0 or (n - c1) % 2 or c1 > min(n, m):
        return Fraction(0)
    c0, c2 = (n - c1) // 2, (m - c1) // 2
    pairs = (n + m) // 2
    num = 2**c1 * math.factorial(pairs)
    den = math.comb(n + m, n) * math.factorial(c0) * math.factorial(c1) * math.factorial(c2)
    return Fraction(num, den)


def log_null_pmf(n: int, m: int, c1: int) -> float:
    """Natural log of ``null_pmf`` in floating point (``-inf`` off the support)."""
    _check_sizes(n, m)
    if c1 < 0 or (n - c1) % 2 or c1 > min(n, m):
        return -math.inf
    c0, c2 = (n - c1) / 2, (m - c1) / 2
    N = n + m
    lg = math.lgamma
    return (
        c1 * math.log(2)
        + lg(N / 2 + 1)
        - (lg(N + 1) - lg(n + 1) - lg(m + 1))
        - lg(c0 + 1)
        - lg(c1 + 1)
        - lg(c2 + 1)
    )


@dataclass(frozen=True)
class NullDistribution:
    n: int
    m: int
    support: tuple[int, ...]
    pmf: tuple[Fraction, ...]
    cdf: tuple[Fraction, ...]

    def index(self, c1: int) -> int:
        try:
            return self.support.index(c1)
        except ValueError:
            raise ValueError(
                f"c1={c1} is outside the support for n={self.n}, m={self.m}"
            ) from None

    def pmf_at(self, c1: int) -> Fraction:
        return self.pmf[self.index(c1)]

    def cdf_at(self, c1: int) -> Fraction:
        return self.cdf[self.index(c1)]


@lru_cache(maxsize=256)
def null_distribution(n: int, m: int) -> NullDistribution:
    sup = support(n, m)
    pmf = tuple(null_pmf(n, m, c) for c in sup)
    cdf, acc = [], Fraction(0)
    for p in pmf:
        acc += p
        cdf.append(acc)
    if acc != 1:
        raise AssertionError(f"null pmf for n={n}, m={m} sums to {acc}, not 1")
    return NullDistribution(n, m, sup, pmf, tuple(cdf))


def p_value(n: int, m: int, observed_c1: int) -> Fraction:
    """Exact P(C <= observed_c1); small counts are evidence against the null."""
    return null_distribution(n, m).cdf_at(observed_c1)


def log_p_value(n: int, m: int, observed_c1: int) -> float:
    """Log-space evaluation of ``p_value``, for cross-checks and huge samples."""
    if observed_c1 not in support(n, m):
        raise ValueError(f"c1={observed_c1} is outside the support for n={n}, m={m}")
    terms = [log_null_pmf(n, m, c) for c in range(n % 2, observed_c1 + 1, 2)]
    top = max(terms)
    return top + math.log(math.fsum(math.exp(t - top) for t in terms))


def expected_cross_matches(n: int, m: int) -> float:
    """Mean of the null distribution, n*m/(N-1) in closed form."""
    dist = null_distribution(n, m)
    return float(sum(c * p for c, p in zip(dist.support, dist.pmf)))


@dataclass(frozen=True)
class TestResult:
    """Outcome of one cross-match test.

    ``n`` and ``m`` are the group sizes the null distribution was evaluated
    at. For an odd pooled sample they exclude the real point discarded with
    the pseudo-point (``dropped_index``). ``p_value`` is ``None`` when the
    matching was approximate (greedy mode).
    """

    __test__ = False  # not a pytest class

    c0: int
    c1: int
    c2: int
    p_value: Fraction | None
    n: int
    m: int
    metric: Metric
    exact: bool
    weight: float
    seed: int | None = None
    dropped_index: int | None = None

    @property
    def p_value_float(self) -> float | None:
        return None if self.p_value is None else float(self.p_value)


def cross_match_test(
    sample: PooledSample,
    metric: Metric | str = DEFAULT_METRIC,
    mode: str = "exact",
    seed: int | None = None,
) -> TestResult:
    """Run the full test on a pooled sample: distances, matching, count, p-value."""
    metric = Metric.parse(metric)
    dm = build_distance_matrix(sample, metric)
    matching, dropped = match_points(dm, mode)
    counts = count_pair_types(matching, sample.labels)
    exact = mode == "exact"
    p = p_value(counts.n, counts.m, counts.c1) if exact else None
    return TestResult(
        c0=counts.c0,
        c1=counts.c1,
        c2=counts.c2,
        p_value=p,
        n=counts.n,
        m=counts.m,
        metric=metric,
        exact=exact,
        weight=matching.weight,
        seed=seed,
        dropped_index=dropped,
    )
