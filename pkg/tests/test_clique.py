import random

import networkx as nx

from polypack.clique import greedy_clique, is_clique, max_clique


def graph(n, p, seed):
    g = nx.gnp_random_graph(n, p, seed=seed)
    return g, [set(g.neighbors(v)) for v in range(n)]


def test_against_networkx():
    rng = random.Random(0)
    for seed in range(150):
        n, p = rng.randint(1, 40), rng.uniform(0.1, 0.9)
        g, nbrs = graph(n, p, seed)
        best = max((len(c) for c in nx.find_cliques(g)), default=0)
        c = max_clique(nbrs)
        assert is_clique(nbrs, c) and len(c) == best


def test_greedy_is_maximal():
    for seed in range(50):
        g, nbrs = graph(30, 0.5, seed)
        c = greedy_clique(nbrs)
        assert is_clique(nbrs, c)
        extendable = [v for v in range(30) if v not in c and all(v in nbrs[u] for u in c)]
        assert not extendable


def test_trivial():
    assert max_clique([]) == []
    assert max_clique([set()]) == [0]
