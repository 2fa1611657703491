import random
from itertools import product

import networkx as nx
import pytest

from oracles import phi_power_vec
from polypack.cayley import Unreached, ball, coset_distance
from polypack.cosetlab import (CosetDistanceTable, ball_vs_clump_demo, chain_bound, coset_growth,
                               fiberwise_separation, half_distance_check, max_clump,
                               word_fiber_separated)
from polypack.errors import HypothesisError
from polypack.group import CyclicSubgroup, Element
from polypack.solgeo import distortion_check

CAT_ROWS = [[2, 1], [1, 1]]
PINNED_SERIES = (1, 1, 4, 5, 11, 18, 29)


@pytest.fixture(scope="module")
def series(cat):
    return coset_growth(cat, None, 6, 40, distortion_check(cat, rmax=14))


@pytest.fixture(scope="module")
def table5(cat):
    return CosetDistanceTable(cat, None, 5)


def bfs_clump_oracle(p, pool, r):
    """networkx maximum clique on edges measured by truncated BFS."""
    g = nx.Graph()
    g.add_nodes_from(range(len(pool)))
    for i in range(len(pool)):
        for j in range(i + 1, len(pool)):
            d = coset_distance(p, None, pool[i], pool[j], r - 1)
            if not isinstance(d, Unreached):
                g.add_edge(i, j)
    return max(len(c) for c in nx.find_cliques(g))


def test_fiberwise_separation(cat):
    assert fiberwise_separation(cat, (1, 0), (0, 0)).minimum == 1
    with pytest.raises(ValueError):
        fiberwise_separation(cat, (2, 2), (2, 2))
    prof = fiberwise_separation(cat, (10, 0), (0, 0))
    scan = {k: sum(x * x for x in phi_power_vec(CAT_ROWS, k, (10, 0))) for k in range(-40, 41)}
    assert prof.min_norm2 == min(scan.values()) == scan[prof.argmin]


def test_table_matches_truncated_bfs(cat, table5):
    for c in product(range(-4, 5), repeat=2):
        want = coset_distance(cat, None, (0, 0), c, 4)
        got = table5.distance(c)
        if isinstance(want, Unreached):
            assert isinstance(got, Unreached) or got == 5
        else:
            assert got == want


def test_table_general_subgroup(cat):
    h = CyclicSubgroup(Element((1, -1), 1))
    t = CosetDistanceTable(cat, h, 3)
    for c in [(1, 0), (0, 1), (2, -1), (3, 3)]:
        want = coset_distance(cat, h, (0, 0), c, 3)
        got = t.distance(c)
        assert (isinstance(want, Unreached) and isinstance(got, Unreached)) or got == want


def test_table_refuses_uncertifiable(heis):
    with pytest.raises(HypothesisError):
        CosetDistanceTable(heis, None, 3)


def test_max_clump_examples(cat):
    assert max_clump(cat, None, 1, [(0, 0), (1, 0), (5, 5)]).size == 1
    rep = max_clump(cat, None, 2, [(0, 0), (1, 0), (0, 1)])
    assert rep.size == 3 and rep.exact and rep.verified


def test_max_clump_modes_and_errors(cat):
    pool = [(i, j) for i in range(-2, 3) for j in range(-2, 3)]
    exact = max_clump(cat, None, 3, pool)
    greedy = max_clump(cat, None, 3, pool, mode="greedy")
    assert greedy.size <= exact.size and not greedy.exact
    with pytest.raises(ValueError):
        max_clump(cat, None, 3, pool + [(0, 0)])
    with pytest.raises(ValueError):
        max_clump(cat, None, 3, [(i, 0) for i in range(201)])
    with pytest.raises(ValueError):
        max_clump(cat, None, 3, pool, mode="fast")


def test_max_clump_vs_networkx_oracle(cat):
    rng = random.Random(3)
    for r in (2, 3, 4):
        pool = rng.sample(list(product(range(-6, 7), repeat=2)), 25)
        assert max_clump(cat, None, r, pool).size == bfs_clump_oracle(cat, pool, r)


def test_max_clump_without_table(heis):
    pool = [(0, 0), (1, 0), (0, 1), (3, 0), (1, 1)]
    rep = max_clump(heis, None, 2, pool)
    assert rep.size == bfs_clump_oracle(heis, pool, 2)


def test_fibonacci_pool(cat):
    pool = [phi_power_vec(CAT_ROWS, i, (1, 0)) for i in range(101)]
    assert max_clump(cat, None, 1, pool[:20]).size == 1
    sub = pool[:20]
    assert max_clump(cat, None, 2, sub).size == bfs_clump_oracle(cat, sub, 2)


def test_translation_invariance(cat):
    base = [(i, j) for i in range(-2, 3) for j in range(-2, 3)]
    rng = random.Random(6)
    for _ in range(5):
        a = (rng.randint(-30, 30), rng.randint(-30, 30))
        moved = [(x + a[0], y + a[1]) for x, y in base]
        for r in (2, 4):
            assert max_clump(cat, None, r, moved).size == max_clump(cat, None, r, base).size


def test_series_pinned(series):
    assert series.values == PINNED_SERIES
    assert all(series.exact)
    assert series.B == 1 and series.alpha == pytest.approx(2.0)
    assert [row[:2] for row in series.csv_rows()] == [[r, v] for r, v in enumerate(PINNED_SERIES)]
    assert set(series.fit_summary()) == {"B", "alpha", "C", "A"}


def test_series_invariants(cat, series):
    counts = ball(cat, 6).counts
    for r, v in enumerate(series.values):
        assert v <= counts[r]
        assert v <= series.B * series.alpha ** r + 1e-9
        if r:
            assert series.values[r - 1] <= v
        c = series.chain_bounds[r]
        assert c is None or series.upper[r] <= c


def test_witnesses_verified_by_bfs(cat, series):
    for r in (2, 4, 5):
        w = series.witnesses[r]
        for i, a in enumerate(w):
            for b in w[i + 1:]:
                d = coset_distance(cat, None, a, b, r - 1)
                assert not isinstance(d, Unreached)


def test_small_pool_matches_oracle(cat):
    s = coset_growth(cat, None, 4, 3)
    pool = list(product(range(-3, 4), repeat=2))
    for r in range(1, 5):
        best = bfs_clump_oracle(cat, pool, r)
        assert s.values[r] <= best <= s.upper[r]


def test_bounded_packing_random_pools(cat, series, table5):
    rng = random.Random(2024)
    box = list(product(range(-40, 41), repeat=2))
    for _ in range(1000):
        r = rng.randint(1, 6)
        pool = rng.sample(box, 12)
        size = max_clump(cat, None, r, pool, table=table5).size
        assert size <= series.upper[r]
        c = series.chain_bounds[r]
        assert c is None or size <= c


def test_chain_bound_values():
    assert chain_bound(2, 0, 1.0, 10.0) == 2
    assert chain_bound(2, 100, 1.0, 0.0) is None


def test_half_distance(cat):
    v = half_distance_check(cat, (0, 0), (0, 0), 4.5)
    assert v.status == "inconclusive" and v.coset_distance == 0
    assert half_distance_check(cat, (0, 0), (1, 0), 4.5).status == "inconclusive"
    v = half_distance_check(cat, (0, 0), (40, -7), 4.5)
    assert v.passed and v.margin >= 0


def test_half_distance_uncertifiable(heis):
    assert half_distance_check(heis, (0, 0), (9, 9), 2).status == "inconclusive"


def test_word_fiber_hypothesis_vs_bfs(cat):
    # the hypothesis says no phi^i(c) is within word distance D of 0 in the fiber
    fiber = ball(cat, 4).fiber(0)
    for c in [(1, 0), (3, 2), (9, 1), (20, -3)]:
        orbit = {phi_power_vec(CAT_ROWS, i, c) for i in range(-30, 31)}
        near = any(fiber.get(v, 99) <= 4 for v in orbit)
        assert word_fiber_separated(cat, c, 4) == (not near)


def test_demo(cat):
    rep = ball_vs_clump_demo(cat, None, 1, 100)
    assert len(rep.reps) == 100 == len(set(rep.reps))
    assert list(rep.reps) == [phi_power_vec(CAT_ROWS, i, (1, 0)) for i in range(100)]
    for v in rep.reps[:12]:
        assert coset_distance(cat, None, (0, 0), v, 1) == 1
    assert rep.family_clump < 10


def test_demo_edge_cases(cat, ident):
    assert ball_vs_clump_demo(cat, None, 0).reps == ((0, 0),)
    assert ball_vs_clump_demo(ident, None, 1).reps == ((1, 0),)
    with pytest.raises(ValueError):
        ball_vs_clump_demo(cat, None, -1)
