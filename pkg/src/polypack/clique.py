"""Maximum cliques on small graphs, with vertex sets as int bitmasks."""

from __future__ import annotations

from typing import Sequence


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _relabel(neighbors: Sequence[set[int]]):
    n = len(neighbors)
    order = sorted(range(n), key=lambda v: (-len(neighbors[v]), v))
    pos = {v: i for i, v in enumerate(order)}
    masks = [0] * n
    for v in range(n):
        m = 0
        for u in neighbors[v]:
            if u != v:
                m |= 1 << pos[u]
        masks[pos[v]] = m
    return order, masks


def max_clique(neighbors: Sequence[set[int]]) -> list[int]:
    """Exact maximum clique by branch and bound with a greedy-colouring bound.

    ``neighbors[v]`` is the adjacency set of vertex ``v``; the result is sorted.
    """
    n = len(neighbors)
    if n == 0:
        return []
    order, nbr = _relabel(neighbors)
    best: list[int] = []

    def colour_sort(cand: int):
        verts, bounds = [], []
        uncoloured, colour = cand, 0
        while uncoloured:
            colour += 1
            q = uncoloured
            while q:
                low = q & -q
                v = low.bit_length() - 1
                q &= ~nbr[v] & ~low
                uncoloured &= ~low
                verts.append(v)
                bounds.append(colour)
        return verts, bounds

    def expand(current: list[int], cand: int):
        nonlocal best
        verts, bounds = colour_sort(cand)
        for v, c in zip(reversed(verts), reversed(bounds)):
            if len(current) + c <= len(best):
                return
            current.append(v)
            nxt = cand & nbr[v]
            if nxt:
                expand(current, nxt)
            elif len(current) > len(best):
                best = current[:]
            current.pop()
            cand &= ~(1 << v)

    expand([], (1 << n) - 1)
    return sorted(order[v] for v in best)


def greedy_clique(neighbors: Sequence[set[int]]) -> list[int]:
    """A maximal (not necessarily maximum) clique: repeatedly take the
    candidate with most neighbours among the remaining candidates."""
    cand = set(range(len(neighbors)))
    clique = []
    while cand:
        v = max(sorted(cand), key=lambda u: len(neighbors[u] & cand))
        clique.append(v)
        cand &= neighbors[v]
        cand.discard(v)
    return sorted(clique)


def is_clique(neighbors: Sequence[set[int]], verts: Sequence[int]) -> bool:
    return all(u in neighbors[v] for i, v in enumerate(verts) for u in verts[i + 1:])
