import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crossmatch import (
    DistanceMatrix,
    brute_force_matching,
    build_distance_matrix,
    count_pair_types,
    greedy_matching,
    min_weight_perfect_matching,
    pad_odd,
    pooled_from_groups,
)
from crossmatch.matching import Matching, discard_pseudo, enumerate_perfect_matchings, match_points

from oracles import all_matchings, matching_weights


def line(*xs):
    return build_distance_matrix(np.array(xs, float).reshape(-1, 1))


def unique_optimum(d, rtol=1e-9):
    ws = sorted(w for w, _ in matching_weights(d))
    return len(ws) == 1 or ws[1] - ws[0] > rtol * max(ws[0], 1e-300)


def test_separated_clusters():
    m = min_weight_perfect_matching(line(0, 1, 10, 11))
    assert m.pairs == ((0, 1), (2, 3))
    assert m.weight == 2.0


def test_two_points():
    dm = line(0, 7.5)
    for solve in (min_weight_perfect_matching, brute_force_matching, greedy_matching):
        m = solve(dm)
        assert m.pairs == ((0, 1),)
        assert m.weight == 7.5


def test_brute_force_four_points():
    d = np.array([[0, 1, 5, 5], [1, 0, 5, 5], [5, 5, 0, 1], [5, 5, 1, 0]], float)
    assert brute_force_matching(DistanceMatrix(d)).pairs == ((0, 1), (2, 3))


def test_enumeration_counts():
    # (N-1)!! matchings
    for size, count in [(2, 1), (4, 3), (6, 15), (8, 105), (10, 945), (12, 10395)]:
        assert sum(1 for _ in enumerate_perfect_matchings(size)) == count
    assert list(enumerate_perfect_matchings(4)) == list(all_matchings(4))


def test_brute_force_six_uniform(rng):
    d = rng.uniform(size=(6, 6))
    d = np.triu(d, 1) + np.triu(d, 1).T
    best = min(matching_weights(d))
    m = brute_force_matching(DistanceMatrix(d))
    assert m.weight == pytest.approx(best[0], rel=1e-12)
    assert m.pairs == best[1]


def test_brute_force_limits():
    with pytest.raises(ValueError):
        brute_force_matching(DistanceMatrix(np.zeros((14, 14))))
    with pytest.raises(ValueError):
        brute_force_matching(DistanceMatrix(np.zeros((3, 3))))


@pytest.mark.parametrize("solve", [min_weight_perfect_matching, greedy_matching])
def test_odd_or_tiny_size_rejected(solve):
    with pytest.raises(ValueError, match="pad_odd"):
        solve(line(0, 1, 2))
    with pytest.raises(ValueError):
        solve(DistanceMatrix(np.zeros((0, 0))))


def test_greedy_adversarial_line():
    # all three matchings of {0, 2, 3, 5}: weights 4, 6, 6
    dm = line(0, 2, 3, 5)
    g = greedy_matching(dm)
    assert g.pairs == ((0, 3), (1, 2))
    assert g.weight == 6.0
    assert not g.exact
    e = min_weight_perfect_matching(dm)
    assert e.pairs == ((0, 1), (2, 3))
    assert e.weight == 4.0


def test_greedy_clusters_agree():
    dm = line(0, 1, 10, 11)
    assert greedy_matching(dm).pairs == min_weight_perfect_matching(dm).pairs


@pytest.mark.parametrize("N", [4, 6, 8, 10])
def test_exact_equals_brute_force(N, rng):
    for _ in range(30):
        x = rng.normal(size=(N, int(rng.integers(1, 6))))
        dm = build_distance_matrix(x)
        exact = min_weight_perfect_matching(dm)
        bf = brute_force_matching(dm)
        assert exact.weight == pytest.approx(bf.weight, rel=1e-9)
        if unique_optimum(dm.entries):
            assert exact.pairs == bf.pairs


def test_exact_against_networkx(rng):
    # third, independent implementation at sizes beyond brute force
    for N in (14, 30, 60):
        x = rng.normal(size=(N, 3))
        d = build_distance_matrix(x).entries
        g = nx.Graph()
        g.add_weighted_edges_from((i, j, d[i, j]) for i in range(N) for j in range(i + 1, N))
        ref = math.fsum(d[i, j] for i, j in nx.min_weight_matching(g))
        assert min_weight_perfect_matching(DistanceMatrix(d)).weight == pytest.approx(ref, rel=1e-9)


def test_exact_handles_ties_and_zeros():
    # every pairing of a regular simplex has the same weight
    dm = build_distance_matrix(np.eye(8))
    m = min_weight_perfect_matching(dm)
    assert m.weight == pytest.approx(4 * math.sqrt(2))
    assert min_weight_perfect_matching(DistanceMatrix(np.zeros((6, 6)))).weight == 0.0
    # duplicated points must pair up
    m = min_weight_perfect_matching(line(3, 3, 7, 7, 3, 3))
    assert m.weight == 0.0


def test_exact_on_integer_grid_duplicates(rng):
    for _ in range(20):
        x = rng.integers(0, 3, size=(10, 2)).astype(float)
        dm = build_distance_matrix(x, "manhattan")
        assert min_weight_perfect_matching(dm).weight == pytest.approx(brute_force_matching(dm).weight, abs=1e-12)


def test_deterministic_pairing(rng):
    dm = build_distance_matrix(rng.normal(size=(80, 5)))
    assert min_weight_perfect_matching(dm) == min_weight_perfect_matching(dm)


@pytest.mark.parametrize("N", [6, 8])
def test_permutation_equivariance(N, rng):
    for _ in range(10):
        x = rng.normal(size=(N, 2))
        dm = build_distance_matrix(x)
        if not unique_optimum(dm.entries):
            continue
        perm = rng.permutation(N)
        m1 = min_weight_perfect_matching(dm)
        m2 = min_weight_perfect_matching(build_distance_matrix(x[perm]))
        mapped = {tuple(sorted((int(perm[k]), int(perm[l])))) for k, l in m2.pairs}
        assert mapped == set(m1.pairs)


def test_weight_matches_entries(rng):
    dm = build_distance_matrix(rng.normal(size=(40, 3)))
    m = min_weight_perfect_matching(dm)
    assert m.weight == pytest.approx(sum(dm[k, l] for k, l in m.pairs), rel=1e-9)
    covered = sorted(i for p in m.pairs for i in p)
    assert covered == list(range(40))
    assert all(k < l for k, l in m.pairs)


def test_greedy_never_beats_exact(rng):
    for N in (4, 10, 50, 120):
        dm = build_distance_matrix(rng.normal(size=(N, 4)))
        assert min_weight_perfect_matching(dm).weight <= greedy_matching(dm).weight + 1e-9


def test_pad_odd_layout():
    dm = line(0, 1, 100)
    padded = pad_odd(dm)
    assert padded.size == 4
    assert padded.pseudo_index == 3
    assert np.all(padded.entries[3] == 0) and np.all(padded.entries[:, 3] == 0)
    np.testing.assert_array_equal(padded.entries[:3, :3], dm.entries)
    with pytest.raises(ValueError):
        pad_odd(line(0, 1))


def test_pad_odd_discards_least_matchable():
    # padded matchings: {01,2p}=1, {02,1p}=100, {0p,12}=99
    dm = line(0, 1, 100)
    padded = pad_odd(dm)
    raw = min_weight_perfect_matching(padded)
    assert (2, 3) in raw.pairs
    kept, dropped = discard_pseudo(raw, padded.pseudo_index)
    assert kept.pairs == ((0, 1),)
    assert dropped == 2
    counts = count_pair_types(kept, [0, 1, 0])
    assert counts.c1 == 1
    assert match_points(dm) == (kept, 2)


def test_count_pair_types_examples():
    labels = [0, 0, 1, 1]
    c = count_pair_types(Matching(((0, 1), (2, 3)), 0.0), labels)
    assert (c.c0, c.c1, c.c2) == (1, 0, 1)
    c = count_pair_types(Matching(((0, 2), (1, 3)), 0.0), labels)
    assert (c.c0, c.c1, c.c2) == (0, 2, 0)
    with pytest.raises(ValueError):
        count_pair_types(Matching(((0, 5), (1, 3)), 0.0), labels)
    with pytest.raises(ValueError):
        count_pair_types(Matching(((0, 1),), 0.0), labels)


def test_c1_bounded_at_paper_scale(rng):
    sample = pooled_from_groups(rng.normal(size=(200, 10)), rng.normal(size=(200, 10)))
    m = min_weight_perfect_matching(build_distance_matrix(sample))
    c = count_pair_types(m, sample.labels)
    assert c.c1 <= 200
    assert c.c0 + c.c1 + c.c2 == 200
    assert 2 * c.c0 + c.c1 == 200 and 2 * c.c2 + c.c1 == 200


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 6),
    st.integers(1, 6),
    st.integers(0, 2**32 - 1),
    st.sampled_from([0.5, 3.0, 1e3]),
)
def test_label_bookkeeping_properties(n, m, seed, scale):
    r = np.random.default_rng(seed)
    sample = pooled_from_groups(r.normal(size=(n, 3)), r.normal(size=(m, 3)))
    dm = build_distance_matrix(sample)
    matching, _ = match_points(dm)
    c = count_pair_types(matching, sample.labels)
    assert c.c0 + c.c1 + c.c2 == len(matching.pairs)
    assert c.c1 % 2 == c.n % 2
    # label swap exchanges c0 and c2
    swapped = count_pair_types(matching, 1 - sample.labels)
    assert (swapped.c0, swapped.c1, swapped.c2) == (c.c2, c.c1, c.c0)
    # rescaling distances leaves the argmin alone
    scaled, _ = match_points(DistanceMatrix(dm.entries * scale))
    assert count_pair_types(scaled, sample.labels).c1 == c.c1
    if (n + m) % 2 == 0:
        assert (c.n, c.m) == (n, m)
