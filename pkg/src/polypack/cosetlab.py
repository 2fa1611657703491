"""Bounded packing and coset growth for H = <z t> in P = Z^n x|_phi Z.

Coset distance reduces to one orbit question.  Left translation gives
d(aH, bH) = d(H, cH) with c = b - a.  The double coset HcH is the set of g
whose coset representative lies in the phi-orbit of c, so

    d(H, cH) = min{ |g| : coset_rep(g) in O_c }.

One BFS ball therefore tabulates d(H, cH) for every c within its radius.  The
key is the canonical orbit representative.

The coset growth f_H(r) is the largest set of cosets that are pairwise at
coset distance < r (a clump).  The count of cosets within distance r of H is
already infinite at r = 1 (see :func:`ball_vs_clump_demo`).
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field
from typing import Sequence

from .cayley import Distance, Unreached, ball_within, coset_distance, lower_bound
from .clique import greedy_clique, is_clique, max_clique
from .errors import HypothesisError, InvariantViolation
from .group import CyclicSubgroup, Element, Presentation, Vector, coset_rep, default_subgroup, vsub
from .orbits import (SeparationProfile, min_separation, orbit_canon,
                     orbit_points_within, packing_bound, supports_certificates)

MAX_EXACT_POOL = 200


def fiberwise_separation(p: Presentation, a: Sequence[int], b: Sequence[int]) -> SeparationProfile:
    """min over i of ||phi^i(a - b)||: how close aH and bH come within any fiber."""
    a, b = tuple(a), tuple(b)
    if a == b:
        raise ValueError("a and b must differ")
    return min_separation(p, vsub(a, b))


def _identity_phi(p: Presentation) -> bool:
    return p.phi == p.phi.identity(p.n)


def tabulates(p: Presentation) -> bool:
    return _identity_phi(p) or supports_certificates(p)


class CosetDistanceTable:
    """d(H, cH) for every coset within ``radius`` of H, from one BFS ball."""

    def __init__(self, p: Presentation, h: CyclicSubgroup | None, radius: int):
        if not tabulates(p):
            raise HypothesisError(f"orbit canonicalisation needs hyperbolic diagonalizable phi "
                                  f"(got {p.phi.literal()})")
        self.p, self.h, self.radius = p, default_subgroup(p, h), radius
        reps: dict[Vector, int] = {}
        for g, d in ball_within(p, radius).items():
            rep = coset_rep(p, self.h, g)
            if d < reps.get(rep, radius + 1):
                reps[rep] = d
        table: dict[Vector, int] = {}
        for rep, d in reps.items():
            key = orbit_canon(p, rep)
            if d < table.get(key, radius + 1):
                table[key] = d
        self._table = table
        self._orbit_cache: dict[tuple[Vector, int], list[Vector]] = {}

    def distance(self, c: Sequence[int]) -> Distance:
        d = self._table.get(orbit_canon(self.p, tuple(c)))
        return Unreached(self.radius) if d is None else d

    def coset_distance(self, a: Sequence[int], b: Sequence[int]) -> Distance:
        return self.distance(vsub(tuple(b), tuple(a)))

    def _orbit_in_box(self, key: Vector, box: int) -> list[Vector]:
        cached = self._orbit_cache.get((key, box))
        if cached is None:
            if not any(key) or _identity_phi(self.p):
                pts = [key]
            else:
                pts = list(orbit_points_within(self.p, key, self.p.n * box * box).values())
            cached = [v for v in pts if max(map(abs, v)) <= box]
            self._orbit_cache[(key, box)] = cached
        return cached

    def close_vectors(self, r: int, box: int) -> set[Vector]:
        """All c with ||c||_inf <= box and d(H, cH) < r."""
        if r - 1 > self.radius:
            raise ValueError(f"table radius {self.radius} cannot decide distance < {r}")
        out: set[Vector] = set()
        for key, d in self._table.items():
            if d < r:
                out.update(self._orbit_in_box(key, box))
        return out


@dataclass(frozen=True)
class HalfDistanceVerdict:
    status: str  # "pass" | "fail" | "inconclusive"
    a: Vector
    b: Vector
    D: float
    coset_distance: Distance | None
    margin: float | None
    reason: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"


@lru_cache(maxsize=32)
def _fiber_ball(p: Presentation, radius: int) -> tuple[frozenset, int]:
    near = frozenset(k[:-1] for k in ball_within(p, radius).keys() if k[-1] == 0)
    return near, max(sum(x * x for x in v) for v in near)


def word_fiber_separated(p: Presentation, c: Vector, D: float) -> bool | None:
    """Whether |(phi^i(c), 0)| > D for every i; ``None`` if uncertifiable.

    Elements (v, 0) within word distance D form a finite set whose largest norm
    bounds the orbit points worth checking.
    """
    if not any(c):
        return False
    if not supports_certificates(p):
        return None
    radius = math.floor(D)
    near, m2 = _fiber_ball(p, radius)
    pts = orbit_points_within(p, c, m2)
    return not any(v in near for v in pts.values())


def half_distance_check(p: Presentation, a: Sequence[int], b: Sequence[int], D: float,
                        rmax: int | None = None, h: CyclicSubgroup | None = None
                        ) -> HalfDistanceVerdict:
    """If every fiber pair a h^k, b h^k is farther than D apart in the word
    metric, the cosets aH, bH are at distance >= D/2.  Measured by truncated BFS."""
    a, b = tuple(a), tuple(b)
    h = default_subgroup(p, h)
    if a == b:
        return HalfDistanceVerdict("inconclusive", a, b, D, 0, None, "a = b: identical cosets")
    hyp = word_fiber_separated(p, vsub(b, a), D)
    if hyp is None:
        return HalfDistanceVerdict("inconclusive", a, b, D, None, None,
                                   "fiber separation cannot be certified for this phi")
    if not hyp:
        return HalfDistanceVerdict("inconclusive", a, b, D, None, None,
                                   f"some fiber pair is within word distance {D}")
    if rmax is None:
        rmax = math.ceil(D / 2)
    d = coset_distance(p, h, a, b, rmax)
    margin = lower_bound(d) - D / 2
    status = "pass" if margin >= 0 else "fail"
    return HalfDistanceVerdict(status, a, b, D, d, margin)


# --------------------------------------------------------------------------
# clumps


@dataclass(frozen=True)
class ClumpReport:
    r: int
    pool_size: int
    clump: tuple[Vector, ...]
    exact: bool
    verified: bool

    @property
    def size(self) -> int:
        return len(self.clump)


def _edge_sets(p, h, r, pool, table=None) -> list[set[int]]:
    n = len(pool)
    nbrs: list[set[int]] = [set() for _ in range(n)]
    if r <= 0:
        return nbrs
    if table is None and tabulates(p):
        table = CosetDistanceTable(p, h, r - 1)
    for i in range(n):
        for j in range(i + 1, n):
            if table is not None:
                d = table.coset_distance(pool[i], pool[j])
            else:
                d = coset_distance(p, h, pool[i], pool[j], r - 1)
            if not isinstance(d, Unreached) and d < r:
                nbrs[i].add(j)
                nbrs[j].add(i)
    return nbrs


def _verify_clump(p, h, r, clump) -> bool:
    for i, a in enumerate(clump):
        for b in clump[i + 1:]:
            d = coset_distance(p, h, a, b, max(r - 1, 0))
            if isinstance(d, Unreached) or d >= r:
                return False
    return True


def max_clump(p: Presentation, h: CyclicSubgroup | None, r: int, pool: Sequence[Sequence[int]],
              mode: str = "exact", max_exact: int = MAX_EXACT_POOL,
              table: CosetDistanceTable | None = None) -> ClumpReport:
    """Largest sub-collection of ``pool`` with all pairwise coset distances < r.

    Edges come from the coset-distance table (or truncated BFS when phi admits
    no orbit certificates).  Every pair of the returned clump is re-checked
    with truncated BFS.  A prebuilt ``table`` must have radius >= r - 1.
    """
    h = default_subgroup(p, h)
    pool = [tuple(x) for x in pool]
    if len(set(pool)) != len(pool):
        raise ValueError("pool must consist of distinct coset representatives")
    if mode not in ("exact", "greedy"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exact" and len(pool) > max_exact:
        raise ValueError(f"pool of {len(pool)} exceeds the exact-mode cap {max_exact}")
    if not pool:
        return ClumpReport(r, 0, (), True, True)
    if table is not None and table.radius < r - 1:
        raise ValueError(f"table radius {table.radius} cannot decide distance < {r}")
    nbrs = _edge_sets(p, h, r, pool, table)
    idx = max_clique(nbrs) if mode == "exact" else greedy_clique(nbrs)
    assert is_clique(nbrs, idx)
    clump = tuple(pool[i] for i in idx)
    if not _verify_clump(p, h, r, clump):
        raise InvariantViolation(f"clump {clump} failed BFS verification at r = {r}")
    return ClumpReport(r, len(pool), clump, mode == "exact", True)


def _clique_through_origin(close_small: set[Vector], close_diff: set[Vector]) -> list[Vector]:
    verts = sorted(v for v in close_small if any(v))
    pos = {v: i for i, v in enumerate(verts)}
    nbrs: list[set[int]] = [set() for _ in verts]
    for i, u in enumerate(verts):
        for d in close_diff:
            w = tuple(x + y for x, y in zip(u, d))
            j = pos.get(w)
            if j is not None and j != i:
                nbrs[i].add(j)
    clique = [verts[i] for i in max_clique(nbrs)]
    return [tuple([0] * len(next(iter(close_diff))))] + clique


@dataclass(frozen=True)
class CosetGrowthSeries:
    """f_H(r) = largest clump in the pool ||a||_inf <= pool_bound, for r <= rmax.

    ``upper[r]`` bounds any clump that fits in a translate of the pool; when
    it equals ``values[r]`` the entry is exact.  The fit is B = f_H(0) and the
    least alpha with f_H(r) <= B alpha^r on every computed radius.
    """

    pool_bound: int
    values: tuple[int, ...]
    upper: tuple[int, ...]
    witnesses: tuple[tuple[Vector, ...], ...]
    B: float
    alpha: float
    C: float | None = None
    A: float | None = None
    chain_bounds: tuple[int | None, ...] = field(default=())

    @property
    def exact(self) -> tuple[bool, ...]:
        return tuple(v == u for v, u in zip(self.values, self.upper))

    def csv_rows(self) -> list[list]:
        return [[r, v, str(e).lower()] for r, (v, e) in enumerate(zip(self.values, self.exact))]

    def fit_summary(self) -> dict:
        return {"B": self.B, "alpha": self.alpha, "C": self.C, "A": self.A}


def euclidean_radius(r: int, C: float, A: float) -> float:
    """Inverts the distortion bound: pairs farther apart than this in every
    fiber sit at coset distance >= r."""
    return math.exp((2 * r - A) / C)


def chain_bound(n: int, r: int, C: float, A: float, limit: float = 1e6) -> int | None:
    """packing_bound(E(r)), or ``None`` when E(r) is too large to count."""
    e = euclidean_radius(r, C, A)
    return None if e > limit else packing_bound(n, e)


def coset_growth(p: Presentation, h: CyclicSubgroup | None = None, rmax: int = 6,
                 pool_bound: int = 40, distortion=None) -> CosetGrowthSeries:
    """Clump series f_H(0..rmax) on the pool ||a||_inf <= pool_bound.

    By translation invariance a clump in the pool can be moved to contain H.
    The lower value searches cliques through H inside the pool; the upper value
    allows members up to 2 * pool_bound away.
    """
    h = default_subgroup(p, h)
    if not tabulates(p):
        raise HypothesisError("coset growth needs hyperbolic diagonalizable phi")
    values, upper, witnesses = [1], [1], [((0,) * p.n,)]
    if rmax >= 1:
        table = CosetDistanceTable(p, h, max(rmax - 1, 0))
    for r in range(1, rmax + 1):
        small = table.close_vectors(r, pool_bound)
        mid = table.close_vectors(r, 2 * pool_bound)
        big = table.close_vectors(r, 4 * pool_bound)
        lo = _clique_through_origin(small, mid)
        hi = _clique_through_origin(mid, big)
        values.append(len(lo))
        upper.append(len(hi))
        witnesses.append(tuple(lo))
    counts = ball_within(p, rmax).counts
    for r, v in enumerate(values):
        if v > counts[r] or (r and v < values[r - 1]):
            raise InvariantViolation(f"clump series {values} breaks monotonicity or the ball cap")
    B = float(values[0])
    alpha = max([1.0] + [(v / B) ** (1.0 / r) for r, v in enumerate(values) if r >= 1])
    C = A = None
    chains: tuple = ()
    if distortion is not None:
        C, A = distortion.C, distortion.A
        chains = tuple(chain_bound(p.n, r, C, A) for r in range(rmax + 1))
    return CosetGrowthSeries(pool_bound, tuple(values), tuple(upper), tuple(witnesses), B, alpha,
                             C, A, chains)


# --------------------------------------------------------------------------
# the ball reading of coset growth is infinite


@dataclass(frozen=True)
class DemoReport:
    r: int
    reps: tuple[Vector, ...]
    certified_distance: tuple[int, ...]
    family_clump: int

    def to_dict(self) -> dict:
        return {"r": self.r, "distinct_cosets": len(self.reps),
                "reps": [list(v) for v in self.reps],
                "coset_distance": list(self.certified_distance),
                "max_clump_in_family": self.family_clump}


def ball_vs_clump_demo(p: Presentation, h: CyclicSubgroup | None = None, r: int = 1,
                       count: int = 100) -> DemoReport:
    """Exhibit distinct cosets phi^i(e_1) H, 0 <= i < count, each at coset
    distance exactly 1 from H, via the edge h^i -- h^i e_1.

    ``family_clump`` is the largest subfamily (with H) pairwise within
    distance r, which stays small while the family keeps growing.
    """
    h = default_subgroup(p, h)
    if r < 0:
        raise ValueError("r must be non-negative")
    zero = (0,) * p.n
    if r == 0:
        return DemoReport(0, (zero,), (0,), 1)
    e1 = Element(tuple(int(j == 0) for j in range(p.n)), 0)
    reps: dict[Vector, int] = {}
    for i in range(count):
        hi = h.power(p, i)
        g = p.mul(hi, e1)
        rep = coset_rep(p, h, g)
        # g = h^i e_1 is one generator away from h^i in H, and rep != 0
        if p.mul(p.inv(hi), g) != e1 or not any(rep):
            raise InvariantViolation(f"edge h^{i} -- h^{i} e_1 does not certify {rep}")
        reps.setdefault(rep, 1)
    reps_t = tuple(reps)
    family = [zero] + list(reps_t)
    if tabulates(p):
        table = CosetDistanceTable(p, h, r)
        nbrs = [set() for _ in family]
        for i, u in enumerate(family):
            for j in range(i + 1, len(family)):
                if not isinstance(table.coset_distance(u, family[j]), Unreached):
                    nbrs[i].add(j)
                    nbrs[j].add(i)
        clump = len(max_clique(nbrs))
    else:
        clump = max_clump(p, h, r + 1, family[:MAX_EXACT_POOL]).size
    return DemoReport(r, reps_t, tuple(1 for _ in reps_t), clump)
