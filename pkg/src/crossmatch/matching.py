"""Minimum-weight perfect matching on the pooled distance matrix.

``min_weight_perfect_matching`` is the exact solver used for every reported
p-value. ``brute_force_matching`` enumerates all (N-1)!! pairings and exists
as a test oracle; ``greedy_matching`` is an opt-in approximation for large N.

When several matchings are optimal the blossom solver's fixed pivoting order
picks one, and c1 may differ between equally-optimal matchings. With
continuous data such ties have probability zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from ._blossom import max_weight_perfect_matching
from .core import DistanceMatrix

BRUTE_FORCE_MAX_SIZE = 12
# reduced costs within this fraction of the largest distance count as zero
TIGHT_RTOL = 1e-10


@dataclass(frozen=True)
class Matching:
    pairs: tuple[tuple[int, int], ...]
    weight: float
    exact: bool = True

    def __post_init__(self) -> None:
        pairs = tuple(sorted((min(k, l), max(k, l)) for k, l in self.pairs))
        object.__setattr__(self, "pairs", pairs)

    def mate(self) -> dict[int, int]:
        out = {}
        for k, l in self.pairs:
            out[k] = l
            out[l] = k
        return out


@dataclass(frozen=True)
class PairTypeCounts:
    c0: int
    c1: int
    c2: int

    @property
    def n(self) -> int:
        return 2 * self.c0 + self.c1

    @property
    def m(self) -> int:
        return 2 * self.c2 + self.c1


def _entries(dm) -> np.ndarray:
    return dm.entries if isinstance(dm, DistanceMatrix) else np.asarray(dm, dtype=np.float64)


def _check_even(size: int) -> None:
    if size < 2:
        raise ValueError(f"need at least 2 points to match, got {size}")
    if size % 2:
        raise ValueError(f"perfect matching needs an even size, got {size}; apply pad_odd first")


def _weight(d: np.ndarray, pairs) -> float:
    return math.fsum(float(d[k, l]) for k, l in pairs)


def _from_mate(d: np.ndarray, mate: np.ndarray, exact: bool) -> Matching:
    size = len(mate)
    if (mate < 0).any() or (mate[mate] != np.arange(size)).any() or (mate == np.arange(size)).any():
        raise AssertionError("matching solver returned an invalid pairing")
    pairs = [(k, int(mate[k])) for k in range(size) if k < mate[k]]
    return Matching(tuple(pairs), _weight(d, pairs), exact)


def min_weight_perfect_matching(dm: DistanceMatrix) -> Matching:
    """Exact minimum-weight perfect matching via the O(N^3) blossom algorithm."""
    d = _entries(dm)
    _check_even(d.shape[0])
    if d.shape[0] == 2:
        return Matching(((0, 1),), float(d[0, 1]))
    scale = float(d.max())
    mate = max_weight_perfect_matching(np.ascontiguousarray(-d), TIGHT_RTOL * scale)
    return _from_mate(d, mate, exact=True)


def enumerate_perfect_matchings(size: int) -> Iterator[tuple[tuple[int, int], ...]]:
    """Yield every perfect matching of ``range(size)`` in lexicographic order."""

    def rec(free: tuple[int, ...]):
        if not free:
            yield ()
            return
        first, rest = free[0], free[1:]
        for i, partner in enumerate(rest):
            remaining = rest[:i] + rest[i + 1:]
            for tail in rec(remaining):
                yield ((first, partner),) + tail

    if size % 2:
        raise ValueError("odd size has no perfect matching")
    yield from rec(tuple(range(size)))


def brute_force_matching(dm: DistanceMatrix) -> Matching:
    """Try all (N-1)!! matchings; the first minimum in lexicographic order wins.

    A later matching replaces the incumbent only if lighter by more than
    1e-9 relative, so near-ties resolve to the earliest enumerated pairing.
    """
    d = _entries(dm)
    size = d.shape[0]
    _check_even(size)
    if size > BRUTE_FORCE_MAX_SIZE:
        raise ValueError(f"brute force limited to N <= {BRUTE_FORCE_MAX_SIZE}, got {size}")
    best_pairs, best_w = None, math.inf
    for pairs in enumerate_perfect_matchings(size):
        w = _weight(d, pairs)
        if best_pairs is None or w < best_w - 1e-9 * abs(best_w):
            best_pairs, best_w = pairs, w
    return Matching(best_pairs, best_w)


def greedy_matching(dm: DistanceMatrix) -> Matching:
    """Repeatedly pair the closest two unmatched points. Approximate."""
    d = _entries(dm)
    size = d.shape[0]
    _check_even(size)
    iu, ju = np.triu_indices(size, k=1)
    order = np.argsort(d[iu, ju], kind="stable")
    used = np.zeros(size, bool)
    pairs = []
    for idx in order:
        k, l = iu[idx], ju[idx]
        if used[k] or used[l]:
            continue
        used[k] = used[l] = True
        pairs.append((int(k), int(l)))
        if len(pairs) == size // 2:
            break
    return Matching(tuple(pairs), _weight(d, pairs), exact=False)


def pad_odd(dm: DistanceMatrix) -> DistanceMatrix:
    """Append a pseudo-point at distance zero from every real point."""
    d = _entries(dm)
    size = d.shape[0]
    if size % 2 == 0:
        raise ValueError(f"pad_odd expects an odd size, got {size}")
    padded = np.zeros((size + 1, size + 1))
    padded[:size, :size] = d
    metric = dm.metric if isinstance(dm, DistanceMatrix) else None
    return DistanceMatrix(padded, metric, pseudo_index=size)


def discard_pseudo(matching: Matching, pseudo_index: int) -> tuple[Matching, int]:
    """Drop the pair holding ``pseudo_index``; also return the real point it took."""
    kept, dropped = [], None
    for k, l in matching.pairs:
        if pseudo_index in (k, l):
            dropped = l if k == pseudo_index else k
        else:
            kept.append((k, l))
    if dropped is None:
        raise ValueError(f"index {pseudo_index} is not matched")
    # the pseudo pair has zero weight, so the total is unchanged
    return Matching(tuple(kept), matching.weight, matching.exact), dropped


def count_pair_types(matching: Matching, labels: Sequence[int]) -> PairTypeCounts:
    """Count (0,0), mixed and (1,1) pairs; ``c1`` is the cross-match statistic."""
    labels = [int(g) for g in labels]
    covered = {i for pair in matching.pairs for i in pair}
    if covered and max(covered) >= len(labels):
        raise ValueError(f"matching references index {max(covered)} but only {len(labels)} labels given")
    if len(labels) - len(covered) > 1:
        raise ValueError(f"{len(labels)} labels for a matching covering {len(covered)} points")
    counts = [0, 0, 0]
    for k, l in matching.pairs:
        counts[labels[k] + labels[l]] += 1
    return PairTypeCounts(*counts)


def match_points(dm: DistanceMatrix, mode: str = "exact") -> tuple[Matching, int | None]:
    """Pad if needed, match, and drop the pseudo pair.

    Returns the matching over real points and the index of the real point
    discarded with the pseudo-point (``None`` for even N).
    """
    if mode not in ("exact", "greedy"):
        raise ValueError(f"mode must be 'exact' or 'greedy', got {mode!r}")
    solve = min_weight_perfect_matching if mode == "exact" else greedy_matching
    if dm.size % 2 == 0:
        return solve(dm), None
    padded = pad_odd(dm)
    return discard_pseudo(solve(padded), padded.pseudo_index)
