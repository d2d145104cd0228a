"""Independent reference computations used only by the test-suite."""

from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction
from itertools import combinations

import numpy as np


def all_matchings(size):
    """Every perfect matching of range(size), by direct recursion."""

    def rec(idx):
        if not idx:
            yield ()
            return
        a, rest = idx[0], idx[1:]
        for i, b in enumerate(rest):
            for tail in rec(rest[:i] + rest[i + 1:]):
                yield ((a, b),) + tail

    yield from rec(tuple(range(size)))


def matching_weights(d):
    """(weight, pairs) for every perfect matching of the matrix ``d``."""
    return [(math.fsum(d[a][b] for a, b in pairs), pairs) for pairs in all_matchings(len(d))]


def null_pmf_by_matchings(n, m):
    """P(C = c) by enumerating every matching and every labeling. Tiny N only."""
    N = n + m
    counts, total = Counter(), 0
    for pairs in all_matchings(N):
        for zeros in combinations(range(N), n):
            z = set(zeros)
            counts[sum((a in z) != (b in z) for a, b in pairs)] += 1
            total += 1
    return {c: Fraction(k, total) for c, k in counts.items()}


_POPCOUNT_CACHE = {}


def null_pmf_by_labelings(n, m):
    """P(C = c) over all C(N, n) labelings of the fixed matching (0,1),(2,3),...

    Enumerates every bitmask of N bits (bit set = label 0), keeps those with
    exactly n bits set and counts mixed pairs directly.
    """
    N = n + m
    if N not in _POPCOUNT_CACHE:
        masks = np.arange(1 << N, dtype=np.uint32)
        ones = np.bitwise_count(masks)
        pair_bits = np.uint32(int("01" * (N // 2), 2))
        mixed = np.bitwise_count((masks ^ (masks >> np.uint32(1))) & pair_bits)
        _POPCOUNT_CACHE.clear()
        _POPCOUNT_CACHE[N] = (ones, mixed)
    ones, mixed = _POPCOUNT_CACHE[N]
    sel = mixed[ones == n]
    values, counts = np.unique(sel, return_counts=True)
    total = math.comb(N, n)
    assert counts.sum() == total
    return {int(v): Fraction(int(k), total) for v, k in zip(values, counts)}
