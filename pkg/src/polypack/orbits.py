"""Orbits of a diagonal hyperbolic action on Z^n.

Window certificates work in eigen-coordinates.  If ``c = F x`` with ``F`` the
inverse eigenbasis, then for every eigen-index ``l``

    ||phi^m x||_2 >= |c_l| |lambda_l|^m / ||F||_2,

which grows monotonically in ``m`` for expanding ``l`` and in ``-m`` for
contracting ``l``.  A safety factor of 0.9 is applied to every such lower bound,
and anything claimed from it is re-checked with exact integer norms.

For a nonzero integer vector the smallest eigen-coordinate can be of order
1/||x||, far below float round-off once ||x|| is large, so big vectors get
their coordinates from an mpmath eigenbasis at matching precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Sequence

import mpmath
import numpy as np

from .errors import CertificationError, CoincidentOrbitsError, HypothesisError
from .group import Presentation, Vector, vadd, vsub

SAFETY = 0.9
MAX_SCAN = 5_000
FLOAT_COORD_LIMIT = 2 ** 12


def _norm2(v: Sequence[int]) -> int:
    return sum(x * x for x in v)


@dataclass(frozen=True, eq=False)
class EigenFrame:
    """Float eigen-coordinates for a hyperbolic, R-diagonalizable phi."""

    eigenvalues: np.ndarray
    inverse_basis: np.ndarray = field(repr=False)
    inv_basis_norm: float
    expanding: tuple[int, ...]
    contracting: tuple[int, ...]
    log_moduli: np.ndarray = field(repr=False)
    rows: tuple[tuple[int, ...], ...] = ()
    _precise: dict = field(default_factory=dict, repr=False)

    def coords(self, v: Sequence[int]) -> np.ndarray:
        if max(map(abs, v)) <= FLOAT_COORD_LIMIT:
            return self.inverse_basis @ np.asarray(v, dtype=float)
        return self._coords_precise(v)

    def _precise_basis(self, dps: int):
        basis = self._precise.get(dps)
        if basis is None:
            with mpmath.workdps(dps):
                evs, vecs = mpmath.eig(mpmath.matrix([list(r) for r in self.rows]))
                n = len(self.rows)
                cols = [None] * n
                for i in range(n):
                    l = int(np.argmin([abs(float(mpmath.re(evs[i])) - x) for x in self.eigenvalues]))
                    col = [mpmath.re(vecs[j, i]) for j in range(n)]
                    norm = mpmath.sqrt(sum(x * x for x in col))
                    cols[l] = [x / norm for x in col]
                if any(c is None for c in cols):
                    raise CertificationError("high-precision eigenbasis does not match the float frame")
                basis = mpmath.matrix([[cols[i][j] for i in range(n)] for j in range(n)])
            self._precise[dps] = basis
        return basis

    def _coords_precise(self, v: Sequence[int]) -> np.ndarray:
        digits = len(str(max(map(abs, v))))
        dps = 50 * (1 + (2 * digits + 30) // 50)
        basis = self._precise_basis(dps)
        with mpmath.workdps(dps):
            c = mpmath.lu_solve(basis, mpmath.matrix([int(x) for x in v]))
            return np.array([float(c[i]) for i in range(len(v))])

    def lower_bound(self, c: np.ndarray, m: int, idx: Sequence[int]) -> float:
        """Safety-scaled lower bound on ||phi^m x|| from the eigen-indices ``idx``."""
        best = 0.0
        for l in idx:
            if c[l] != 0.0:
                exponent = math.log(abs(c[l])) + m * self.log_moduli[l]
                best = max(best, math.exp(min(exponent, 700.0)))
        return SAFETY * best / self.inv_basis_norm


@lru_cache(maxsize=64)
def eigen_frame(p: Presentation) -> EigenFrame:
    s = p.spectral
    if not s.hyperbolic:
        raise HypothesisError(f"phi = {p.phi.literal()} is not hyperbolic "
                              f"(eigenvalues {[round(abs(x), 6) for x in s.eigenvalues]})")
    if not s.diagonalizable_over_R:
        raise HypothesisError(f"phi = {p.phi.literal()} is not diagonalizable over R")
    lams = s.real_eigenvalues()
    finv = np.linalg.inv(s.eigenbasis)
    mods = np.abs(lams)
    return EigenFrame(
        eigenvalues=lams,
        inverse_basis=finv,
        inv_basis_norm=float(np.linalg.norm(finv, 2)),
        expanding=tuple(i for i, r in enumerate(mods) if r > 1),
        contracting=tuple(i for i, r in enumerate(mods) if r < 1),
        log_moduli=np.log(mods),
        rows=p.phi.rows,
    )


def supports_certificates(p: Presentation) -> bool:
    s = p.spectral
    return s.hyperbolic and s.diagonalizable_over_R


def require_standing_hypothesis(p: Presentation) -> EigenFrame:
    """Hyperbolic, diagonalizable over R, all eigenvalues positive."""
    frame = eigen_frame(p)
    if not p.spectral.all_positive:
        raise HypothesisError(f"phi = {p.phi.literal()} has a non-positive eigenvalue")
    return frame


def _check_nonzero(v, name="vector"):
    if not any(v):
        raise ValueError(f"{name} must be nonzero")


def orbit_points_within(p: Presentation, x: Sequence[int], bound2: int | Fraction) -> dict[int, Vector]:
    """All ``m -> phi^m(x)`` with ``||phi^m x||^2 <= bound2``, certified complete."""
    x = tuple(x)
    _check_nonzero(x)
    frame = eigen_frame(p)
    c = frame.coords(x)
    bound = math.sqrt(bound2)
    found: dict[int, Vector] = {}
    for direction, idx in ((1, frame.expanding), (-1, frame.contracting)):
        step = p.phi if direction == 1 else p.phi_power(-1)
        m, y = 0, x
        while True:
            if direction == 1 or m != 0:
                if _norm2(y) <= bound2:
                    found[m] = y
            if m != 0 and frame.lower_bound(c, m, idx) > bound and _norm2(y) > bound2:
                break
            if abs(m) > MAX_SCAN:
                raise CertificationError(f"orbit window for {x} did not close within {MAX_SCAN} steps")
            y = step.apply(y)
            m += direction
    return dict(sorted(found.items()))


# --------------------------------------------------------------------------
# truncated orbits and separation profiles


@dataclass(frozen=True)
class TruncatedOrbit:
    base: Vector
    window: int
    points: dict[int, Vector]
    threshold: float
    tail_lower_bound: float
    certified: bool


def truncated_orbit(p: Presentation, z: Sequence[int], window: int,
                    threshold: float | None = None) -> TruncatedOrbit:
    """``{phi^k(z) : |k| <= window}`` exactly, plus a tail certificate.

    The certificate states that every omitted point has norm strictly above
    ``threshold`` (default ``||z||``).
    """
    z = tuple(z)
    _check_nonzero(z, "base point")
    frame = require_standing_hypothesis(p)
    points = {0: z}
    y = z
    for k in range(1, window + 1):
        y = p.phi.apply(y)
        points[k] = y
    y = z
    inv = p.phi_power(-1)
    for k in range(1, window + 1):
        y = inv.apply(y)
        points[-k] = y
    c = frame.coords(z)
    tail = min(frame.lower_bound(c, window + 1, frame.expanding),
               frame.lower_bound(c, -(window + 1), frame.contracting))
    if threshold is None:
        threshold = math.sqrt(_norm2(z))
    return TruncatedOrbit(z, window, dict(sorted(points.items())), float(threshold), tail,
                          tail > threshold)


@dataclass(frozen=True)
class SeparationProfile:
    w: Vector
    norms2: dict[int, int]
    argmin: int
    min_norm2: int
    window: tuple[int, int]

    @property
    def minimum(self) -> float:
        return math.sqrt(self.min_norm2)

    @property
    def values(self) -> dict[int, float]:
        return {k: math.sqrt(v) for k, v in self.norms2.items()}

    def exceeds(self, d: float) -> bool:
        """Exact test ``min_k ||phi^k w|| > d``."""
        return self.min_norm2 > Fraction(d) ** 2

    def to_dict(self) -> dict:
        return {"w": list(self.w), "argmin": self.argmin, "minimum": self.minimum,
                "min_norm2": self.min_norm2, "window": list(self.window),
                "values": {str(k): v for k, v in self.values.items()}}


def min_separation(p: Presentation, w: Sequence[int]) -> SeparationProfile:
    """Exact ``min_k ||phi^k(w)||_2`` over all k in Z with a certified window.

    Scanning in each direction stops once the eigen lower bound exceeds the
    running minimum, which can only decrease afterwards.  Ties go to the
    smallest ``|k|``, then to positive ``k``.
    """
    w = tuple(w)
    _check_nonzero(w)
    frame = eigen_frame(p)
    c = frame.coords(w)
    norms = {0: _norm2(w)}
    best = norms[0]
    lo = hi = 0
    for direction, idx in ((1, frame.expanding), (-1, frame.contracting)):
        step = p.phi if direction == 1 else p.phi_power(-1)
        m, y = 0, w
        while True:
            m += direction
            y = step.apply(y)
            n2 = _norm2(y)
            norms[m] = n2
            best = min(best, n2)
            if n2 > best and frame.lower_bound(c, m, idx) > math.sqrt(best):
                break
            if abs(m) > MAX_SCAN:
                raise CertificationError(f"separation window for {w} did not close")
        if direction == 1:
            hi = m
        else:
            lo = m
    argmin = min((k for k, v in norms.items() if v == best), key=lambda k: (abs(k), -k))
    return SeparationProfile(w, dict(sorted(norms.items())), argmin, best, (lo, hi))


def orbit_canon(p: Presentation, x: Sequence[int]) -> Vector:
    """Canonical representative of the phi-orbit of ``x``.

    The lexicographically least point among those of minimal Euclidean norm;
    ``0`` maps to itself.  Works for any phi admitting certificates; for
    phi = identity every orbit is a point.
    """
    x = tuple(x)
    if not any(x):
        return x
    if p.phi == p.phi.identity(p.n):
        return x
    prof = min_separation(p, x)
    cands = []
    for k, n2 in prof.norms2.items():
        if n2 == prof.min_norm2:
            cands.append(p.act(k, x))
    return min(cands)


# --------------------------------------------------------------------------
# orbit intersections


@dataclass(frozen=True)
class IntersectionResult:
    z: Vector
    w: Vector
    a: Vector
    window: int
    count: int
    points: tuple[tuple[int, int, Vector], ...]
    certified: bool
    index_bounds: tuple[int, int, int, int] | None

    def csv_row(self) -> list[str]:
        fmt = lambda v: ",".join(map(str, v))
        return [fmt(self.z), fmt(self.w), fmt(self.a), str(self.count), str(self.certified).lower()]


def _exp_index(value: float, logmod: float) -> float:
    """Real m with |lambda|^m = value."""
    return math.log(value) / logmod


def _solution_index_bounds(frame: EigenFrame, zc, wc, ac, tol: float):
    """Bounds (i_lo, i_hi, j_lo, j_hi) on every solution of phi^i z = a + phi^j w.

    Each eigen-coordinate l gives lambda_l^i z_l - lambda_l^j w_l = a_l.
    Returns ``None`` when a needed coordinate is numerically zero.
    """
    lm = frame.log_moduli
    slack = 1.0 + 1e-6

    def nz(x):
        return abs(x) > tol

    def i_side(grow_idx, shrink_idx, upper: bool):
        # i -> +inf uses a contracting l with a_l != 0 to pin j, then an
        # expanding l' with z_l' != 0 to cap i; i -> -inf mirrors this.
        best = None
        for l in shrink_idx:
            if not nz(ac[l]):
                continue
            # past i0, |lambda_l^i z_l| <= |a_l| / 2
            if nz(zc[l]):
                i0 = _exp_index(abs(ac[l]) / (2 * abs(zc[l])), lm[l])
                i0 = math.ceil(i0) + 1 if upper else math.floor(i0) - 1
            else:
                i0 = 0
            if not nz(wc[l]):
                bound = i0
            else:
                t1 = _exp_index(1.5 * slack * abs(ac[l]) / abs(wc[l]), lm[l])
                t2 = _exp_index(0.5 / slack * abs(ac[l]) / abs(wc[l]), lm[l])
                jlo, jhi = min(t1, t2), max(t1, t2)
                bound = None
                for lp in grow_idx:
                    if not nz(zc[lp]):
                        continue
                    jext = jhi if lm[lp] > 0 else jlo
                    cap = (abs(ac[lp]) + math.exp(jext * lm[lp]) * abs(wc[lp])) * slack / abs(zc[lp])
                    ib = _exp_index(max(cap, 1e-300), lm[lp])
                    ib = math.floor(ib) + 1 if upper else math.ceil(ib) - 1
                    cand = max(i0, ib) if upper else min(i0, ib)
                    bound = cand if bound is None else (min(bound, cand) if upper else max(bound, cand))
                if bound is None:
                    continue
            best = bound if best is None else (min(best, bound) if upper else max(best, bound))
        return best

    i_hi = i_side(frame.expanding, frame.contracting, True)
    i_lo = i_side(frame.contracting, frame.expanding, False)
    if i_hi is None or i_lo is None:
        return None
    j_hi = j_lo = None
    for l in range(len(lm)):
        if not nz(wc[l]):
            continue
        iext = i_hi if lm[l] > 0 else i_lo
        cap = (abs(ac[l]) + math.exp(iext * lm[l]) * abs(zc[l])) * slack / abs(wc[l])
        jb = _exp_index(max(cap, 1e-300), lm[l])
        if lm[l] > 0:
            jb = math.floor(jb) + 1
            j_hi = jb if j_hi is None else min(j_hi, jb)
        else:
            jb = math.ceil(jb) - 1
            j_lo = jb if j_lo is None else max(j_lo, jb)
    if j_hi is None or j_lo is None:
        return None
    return int(i_lo), int(i_hi), int(j_lo), int(j_hi)


class _OrbitTable:
    """Exact windows {k: phi^k(x)} reused across a sweep."""

    def __init__(self, p: Presentation, window: int):
        self.p, self.window = p, window
        self._cache: dict[Vector, dict[int, Vector]] = {}

    def points(self, x: Vector) -> dict[int, Vector]:
        pts = self._cache.get(x)
        if pts is None:
            pts = {0: x}
            y = x
            for k in range(1, self.window + 1):
                y = self.p.phi.apply(y)
                pts[k] = y
            y = x
            inv = self.p.phi_power(-1)
            for k in range(1, self.window + 1):
                y = inv.apply(y)
                pts[-k] = y
            self._cache[x] = pts
        return pts

    def index(self, x: Vector) -> dict[Vector, int]:
        key = ("idx",) + x
        idx = self._cache.get(key)
        if idx is None:
            idx = {v: k for k, v in self.points(x).items()}
            self._cache[key] = idx
        return idx


def _intersection(p, frame, table, z, w, a, window) -> IntersectionResult:
    if not any(a):
        if orbit_canon(p, z) == orbit_canon(p, w):
            raise CoincidentOrbitsError(f"a = 0 and O_{z} = O_{w}: the intersection is infinite")
        return IntersectionResult(z, w, a, window, 0, (), True, None)
    zidx = table.index(z)
    hits = []
    for j, q in table.points(w).items():
        pt = vadd(a, q)
        i = zidx.get(pt)
        if i is not None:
            hits.append((i, j, pt))
    hits.sort()
    zc, wc, ac = frame.coords(z), frame.coords(w), frame.coords(a)
    scale = 1.0 + max(np.abs(zc).max(), np.abs(wc).max(), np.abs(ac).max())
    bounds = _solution_index_bounds(frame, zc, wc, ac, tol=1e-9 * scale)
    certified = bounds is not None and (-window <= bounds[0] and bounds[1] <= window
                                        and -window <= bounds[2] and bounds[3] <= window)
    return IntersectionResult(z, w, a, window, len(hits), tuple(hits), certified, bounds)


def orbit_intersection_count(p: Presentation, z: Sequence[int], w: Sequence[int],
                             a: Sequence[int], window: int) -> IntersectionResult:
    """``|O_z cap (a + O_w)|`` over ``|i|, |j| <= window``, exact.

    ``certified`` is true when eigen-coordinate bounds confine every solution
    (i, j) of ``phi^i z = a + phi^j w`` to the window, so enlarging it cannot
    add intersections.
    """
    z, w, a = tuple(z), tuple(w), tuple(a)
    _check_nonzero(z, "z")
    _check_nonzero(w, "w")
    frame = require_standing_hypothesis(p)
    return _intersection(p, frame, _OrbitTable(p, window), z, w, a, window)


def translated_intersection_count(p: Presentation, z, w, a, b, window: int) -> IntersectionResult:
    """``|(a + O_z) cap (b + O_w)|`` over the window, counted directly.

    The certificate comes from the equivalent single-translate problem with
    offset ``b - a``.
    """
    z, w, a, b = map(tuple, (z, w, a, b))
    _check_nonzero(z, "z")
    _check_nonzero(w, "w")
    frame = require_standing_hypothesis(p)
    table = _OrbitTable(p, window)
    reduced = _intersection(p, frame, table, z, w, vsub(b, a), window)
    left = {vadd(a, q) for q in table.points(z).values()}
    count = sum(1 for q in table.points(w).values() if vadd(b, q) in left)
    return IntersectionResult(z, w, vsub(b, a), window, count, reduced.points, reduced.certified,
                              reduced.index_bounds)


def box_vectors(n: int, box: int, nonzero: bool = True) -> list[Vector]:
    vecs = [v for v in product(range(-box, box + 1), repeat=n)]
    return [v for v in vecs if any(v)] if nonzero else vecs


def intersection_sweep(p: Presentation, box: int, window: int) -> list[IntersectionResult]:
    """All nonzero z, w, a with coordinates in [-box, box], sorted by (z, w, a)."""
    frame = require_standing_hypothesis(p)
    table = _OrbitTable(p, window)
    vecs = box_vectors(p.n, box)
    return [_intersection(p, frame, table, z, w, a, window)
            for z in vecs for w in vecs for a in vecs]


# --------------------------------------------------------------------------
# packing


def _count_points(n: int, r2: int) -> int:
    if r2 < 0:
        return 0
    if n == 0:
        return 1
    if n == 1:
        return 2 * math.isqrt(r2) + 1
    top = math.isqrt(r2)
    rest = sum(_count_points(n - 1, r2 - x * x) for x in range(1, top + 1))
    return _count_points(n - 1, r2) + 2 * rest


def lattice_points_in_ball(n: int, d: float) -> int:
    """``|{x in Z^n : ||x||_2 <= d}|`` computed exactly."""
    if d < 0:
        raise ValueError("radius must be non-negative")
    r2 = math.floor(Fraction(d) ** 2)
    return _count_points(n, r2)


def packing_bound(p: Presentation | int, d: float) -> int:
    """``2 |S|^2`` with S the integer points of the closed Euclidean d-ball."""
    n = p if isinstance(p, int) else p.n
    s = lattice_points_in_ball(n, d)
    return 2 * s * s


@dataclass(frozen=True)
class SeparatedPair:
    i: int
    j: int
    profile: SeparationProfile


@dataclass(frozen=True)
class ExhaustedReport:
    n_points: int
    n_pairs: int
    packing_bound: int

    @property
    def legal(self) -> bool:
        """Exhausting every pair is only possible when n_points <= packing_bound."""
        return self.n_points <= self.packing_bound


def find_separated_pair(p: Presentation, points: Sequence[Sequence[int]], d: float
                        ) -> SeparatedPair | ExhaustedReport:
    """First pair (i, j), i < j, whose difference stays farther than d apart
    under every power of phi (Euclidean norm)."""
    pts = [tuple(x) for x in points]
    if len(set(pts)) != len(pts):
        raise ValueError("points must be distinct")
    require_standing_hypothesis(p)
    d2 = Fraction(d) ** 2
    seen: dict[Vector, SeparationProfile] = {}
    pairs = 0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            pairs += 1
            diff = vsub(pts[i], pts[j])
            # Euclidean norm is never increased below the orbit minimum; cheap reject
            if _norm2(diff) <= d2:
                continue
            prof = seen.get(diff)
            if prof is None:
                prof = min_separation(p, diff)
                seen[diff] = prof
            if prof.min_norm2 > d2:
                return SeparatedPair(i, j, prof)
    return ExhaustedReport(len(pts), pairs, packing_bound(p, d))
