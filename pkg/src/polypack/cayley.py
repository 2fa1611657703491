"""Word metric on P = Z^n x|_phi Z for the generators e_i^(+-1), t^(+-1).

BFS keys are flat tuples ``(*v, k)``.  Right multiplication is

    (v, k) * e_i^(+-1) = (v +- phi^k(e_i), k),    (v, k) * t^(+-1) = (v, k +- 1),

so a vertex in fiber k needs only the columns of phi^k.
"""

from __future__ import annotations

import math
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np
from scipy import stats

from .errors import BudgetExceeded
from .group import CyclicSubgroup, Element, Presentation, Vector, coset_rep, default_subgroup
from .orbits import orbit_points_within, supports_certificates

DEFAULT_MAX_ELEMENTS = 50_000_000
DEFAULT_HYPERBOLIC_RADIUS = 16

_budget = threading.local()


def current_budget() -> int:
    return getattr(_budget, "max_elements", DEFAULT_MAX_ELEMENTS)


@contextmanager
def element_budget(max_elements: int):
    """Temporarily change the default element cap for every BFS on this thread."""
    if max_elements < 1:
        raise ValueError("element budget must be positive")
    old = current_budget()
    _budget.max_elements = max_elements
    try:
        yield
    finally:
        _budget.max_elements = old


@dataclass(frozen=True)
class Unreached:
    """Distance beyond the BFS horizon; the true value is at least ``horizon + 1``."""

    horizon: int

    @property
    def lower_bound(self) -> int:
        return self.horizon + 1

    def __str__(self):
        return f">{self.horizon}"


Distance = int | Unreached


def lower_bound(d: Distance) -> int:
    return d.lower_bound if isinstance(d, Unreached) else d


class _Columns:
    """Cache of the columns of phi^k, keyed by k."""

    def __init__(self, p: Presentation):
        self.p = p
        self._cols: dict[int, tuple[Vector, ...]] = {}

    def __getitem__(self, k: int) -> tuple[Vector, ...]:
        cols = self._cols.get(k)
        if cols is None:
            m = self.p.phi_power(k)
            cols = tuple(m.column(j) for j in range(self.p.n))
            self._cols[k] = cols
        return cols


def _bfs_layers(p: Presentation, sources: Iterable[tuple], rmax: int,
                targets: set | None = None, max_elements: int | None = None):
    """Layered BFS from ``sources``.

    Returns ``(dist, counts, hit_distance)``; with ``targets`` the search stops
    after the first layer that meets one.
    """
    if max_elements is None:
        max_elements = current_budget()
    cols = _Columns(p)
    dist: dict[tuple, int] = {}
    frontier = []
    for s in sources:
        if s not in dist:
            dist[s] = 0
            frontier.append(s)
    counts = [len(dist)]
    if targets is not None and any(s in targets for s in frontier):
        return dist, counts, 0
    n = p.n
    for r in range(1, rmax + 1):
        nxt = []
        if n == 2:
            for key in frontier:
                x, y, k = key
                (c0x, c0y), (c1x, c1y) = cols[k]
                for nb in ((x + c0x, y + c0y, k), (x - c0x, y - c0y, k),
                           (x + c1x, y + c1y, k), (x - c1x, y - c1y, k),
                           (x, y, k + 1), (x, y, k - 1)):
                    if nb not in dist:
                        dist[nb] = r
                        nxt.append(nb)
        else:
            for key in frontier:
                v, k = key[:-1], key[-1]
                for c in cols[k]:
                    for sgn in (1, -1):
                        nb = tuple(a + sgn * b for a, b in zip(v, c)) + (k,)
                        if nb not in dist:
                            dist[nb] = r
                            nxt.append(nb)
                for nb in (v + (k + 1,), v + (k - 1,)):
                    if nb not in dist:
                        dist[nb] = r
                        nxt.append(nb)
        if len(dist) > max_elements:
            partial = {key: d for key, d in dist.items() if d < r}
            raise BudgetExceeded(
                f"element budget {max_elements} exceeded while expanding radius {r}",
                last_radius=r - 1, partial=(partial, counts[:]))
        counts.append(len(dist))
        frontier = nxt
        if targets is not None and any(s in targets for s in nxt):
            return dist, counts, r
    return dist, counts, None


class Ball:
    """Exact word-metric ball B(1, radius); immutable after construction."""

    def __init__(self, presentation: Presentation, radius: int, dist: dict[tuple, int],
                 counts: Sequence[int]):
        self.presentation = presentation
        self.radius = radius
        self._dist = dist
        self.counts = tuple(counts)

    def __len__(self):
        return len(self._dist)

    def __contains__(self, g: Element) -> bool:
        return g.key() in self._dist

    def distance(self, g: Element) -> Distance:
        d = self._dist.get(g.key())
        return Unreached(self.radius) if d is None else d

    def items(self) -> Iterator[tuple[Element, int]]:
        for key, d in self._dist.items():
            yield Element.from_key(key), d

    def keys(self) -> Iterator[tuple]:
        return iter(self._dist)

    @property
    def distances(self) -> Mapping[Element, int]:
        return {g: d for g, d in self.items()}

    def raw(self) -> Mapping[tuple, int]:
        return self._dist

    def sphere(self, r: int) -> list[Element]:
        return sorted(g for g, d in self.items() if d == r)

    def fiber(self, k: int) -> dict[Vector, int]:
        return {key[:-1]: d for key, d in self._dist.items() if key[-1] == k}

    def growth_series(self) -> "GrowthSeries":
        return fit_growth(self.counts)


def _radius_cap(p: Presentation, max_radius: int | None) -> int | None:
    if max_radius is None and p.spectral.hyperbolic:
        return DEFAULT_HYPERBOLIC_RADIUS
    return max_radius


def ball(p: Presentation, r: int, *, max_elements: int | None = None,
         max_radius: int | None = None) -> Ball:
    """BFS ball of radius ``r`` about the identity.

    Hyperbolic phi is capped at radius 16 unless ``max_radius`` says otherwise.
    Budget overruns raise :class:`BudgetExceeded` carrying the partial ball.
    """
    if r < 0:
        raise ValueError("radius must be non-negative")
    cap = _radius_cap(p, max_radius)
    target = r if cap is None else min(r, cap)
    try:
        dist, counts, _ = _bfs_layers(p, [p.identity.key()], target, max_elements=max_elements)
    except BudgetExceeded as exc:
        partial, counts = exc.partial
        exc.partial = Ball(p, exc.last_radius, partial, counts)
        raise
    result = Ball(p, target, dist, counts)
    if target < r:
        raise BudgetExceeded(f"radius {r} exceeds the configured cap {cap} for hyperbolic phi",
                             last_radius=target, partial=result)
    return result


_cache_lock = threading.Lock()
_ball_cache: dict[Presentation, Ball] = {}


def shared_ball(p: Presentation, r: int) -> Ball:
    """A cached ball of radius >= r (callers must respect their own horizon)."""
    with _cache_lock:
        b = _ball_cache.get(p)
        if b is not None and b.radius >= r:
            return b
    b = ball(p, r)
    with _cache_lock:
        old = _ball_cache.get(p)
        if old is None or old.radius < b.radius:
            _ball_cache[p] = b
    return b


@lru_cache(maxsize=64)
def ball_within(p: Presentation, r: int) -> Ball:
    """Exactly the radius-r ball, cut from the shared cache."""
    b = shared_ball(p, r)
    if b.radius == r:
        return b
    return Ball(p, r, {k: d for k, d in b.raw().items() if d <= r}, b.counts[:r + 1])


def word_distance(p: Presentation, g: Element, h: Element, rmax: int) -> Distance:
    """d(g, h) = |g^-1 h| by BFS, or :class:`Unreached` past ``rmax``."""
    if rmax < 0:
        raise ValueError("rmax must be non-negative")
    target = p.mul(p.inv(g), h).key()
    _, _, hit = _bfs_layers(p, [p.identity.key()], rmax, targets={target})
    return Unreached(rmax) if hit is None else hit


def set_distance(p: Presentation, xs: Iterable[Element], ys: Iterable[Element], rmax: int) -> Distance:
    """inf{d(x, y)} by multi-source BFS from ``xs``."""
    src = [x.key() for x in xs]
    tgt = {y.key() for y in ys}
    if not src or not tgt:
        raise ValueError("both element sets must be nonempty")
    _, _, hit = _bfs_layers(p, src, rmax, targets=tgt)
    return Unreached(rmax) if hit is None else hit


@lru_cache(maxsize=256)
def rep_radius2(p: Presentation, h: CyclicSubgroup | None, r: int) -> int:
    """max ||coset_rep(g)||^2 over the ball of radius r."""
    h = default_subgroup(p, h)
    return max(sum(x * x for x in coset_rep(p, h, g)) for g, _ in ball_within(p, r).items())


def coset_window(p: Presentation, h: CyclicSubgroup | None, a: Sequence[int], b: Sequence[int],
                 rmax: int) -> int | None:
    """Truncation window that makes :func:`coset_distance` exact up to ``rmax``.

    ``d(a h^i, b h^j) = |(phi^(-i s)(b - a), 0) h^(j-i)|``, so a pair within
    ``rmax`` needs ``|j - i| <= rmax`` and ``phi^(-i s)(b - a)`` among the coset
    reps of the rmax-ball.  Returns ``None`` if phi admits no certificate.
    """
    c = tuple(y - x for x, y in zip(a, b))
    if not any(c) or p.phi == p.phi.identity(p.n):
        return rmax
    if not supports_certificates(p):
        return None
    pts = orbit_points_within(p, c, rep_radius2(p, h, rmax))
    if not pts:
        return rmax
    return rmax + max(abs(m) for m in pts)


def coset_distance(p: Presentation, h: CyclicSubgroup | None, a: Sequence[int], b: Sequence[int],
                   rmax: int, window: int | None = None) -> Distance:
    """Distance between aH and bH from truncated families ``{a h^i}``, ``{b h^j}``.

    The default window is :func:`coset_window` when phi admits certificates,
    else ``rmax``.
    """
    h = default_subgroup(p, h)
    if window is None:
        window = coset_window(p, h, a, b, rmax)
        if window is None:
            window = rmax
    if window < rmax:
        raise ValueError(f"window {window} must dominate rmax {rmax}")
    ga, gb = Element(tuple(a), 0), Element(tuple(b), 0)
    xs = [p.mul(ga, x) for x in h.members(p, window)]
    ys = [p.mul(gb, y) for y in h.members(p, window)]
    return set_distance(p, xs, ys, rmax)


# --------------------------------------------------------------------------
# growth fits


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r: float
    rss: float

    @property
    def r2(self) -> float:
        return self.r * self.r


def _linfit(x: np.ndarray, y: np.ndarray) -> LinearFit:
    res = stats.linregress(x, y)
    resid = y - (res.slope * x + res.intercept)
    return LinearFit(float(res.slope), float(res.intercept), float(res.rvalue), float(resid @ resid))


@dataclass(frozen=True)
class GrowthSeries:
    """Ball counts with exponential and polynomial fits on the top half of radii.

    Both fits regress log(count): against r (exponential) and against log r
    (polynomial).  The smaller residual sum of squares picks the model.
    """

    counts: tuple[int, ...]
    radii: tuple[int, ...]
    exponential: LinearFit
    polynomial: LinearFit
    model: str = field(init=False)

    def __post_init__(self):
        model = "exponential" if self.exponential.rss < self.polynomial.rss else "polynomial"
        object.__setattr__(self, "model", model)

    @property
    def rate(self) -> float:
        return self.exponential.slope

    @property
    def degree(self) -> float:
        return self.polynomial.slope

    @property
    def degree_or_rate(self) -> float:
        return self.rate if self.model == "exponential" else self.degree

    @property
    def r2(self) -> float:
        return (self.exponential if self.model == "exponential" else self.polynomial).r2

    @property
    def log_linear_correlation(self) -> float:
        return self.exponential.r

    def summary(self) -> dict:
        return {"model": self.model, "degree_or_rate": self.degree_or_rate, "r2": self.r2}

    def csv_rows(self) -> list[list]:
        return [[r, c] for r, c in enumerate(self.counts)]


def fit_growth(counts: Sequence[int]) -> GrowthSeries:
    rmax = len(counts) - 1
    if rmax < 4:
        raise ValueError("growth fits need counts up to radius >= 4")
    radii = np.arange(max(1, math.ceil(rmax / 2)), rmax + 1)
    y = np.log(np.asarray(counts, dtype=float)[radii])
    return GrowthSeries(tuple(counts), tuple(int(r) for r in radii),
                        _linfit(radii.astype(float), y), _linfit(np.log(radii), y))


def growth_series(p: Presentation, rmax: int, **budget) -> GrowthSeries:
    if rmax < 4:
        raise ValueError("rmax must be at least 4")
    return fit_growth(ball(p, rmax, **budget).counts)
