"""Sol geometry for n = 2.

Chart (x, y, z) with metric ds^2 = e^{2z} dx^2 + e^{-2z} dy^2 + dz^2 and group law

    (a, b, c) * (x, y, z) = (a + e^{-c} x, b + e^{c} y, c + z),

the left action that preserves this metric.  x-translation is cheap at negative
height and y-translation at positive height; the staircase witness path below
descends for x and climbs for y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import spatial

from .cayley import Ball, Unreached, shared_ball
from .errors import HypothesisError
from .group import Element, Presentation, Vector

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(4)


@dataclass(frozen=True)
class SolPoint:
    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not all(math.isfinite(c) for c in (self.x, self.y, self.z)):
            raise ValueError(f"non-finite Sol coordinates {self}")

    def __mul__(self, other: "SolPoint") -> "SolPoint":
        return SolPoint(self.x + math.exp(-self.z) * other.x,
                        self.y + math.exp(self.z) * other.y,
                        self.z + other.z)

    def astuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class PathEstimate:
    polyline: tuple[SolPoint, ...]
    length: float
    closed_form: float | None = None


def _as_points(path: Iterable) -> list[SolPoint]:
    return [p if isinstance(p, SolPoint) else SolPoint(*p) for p in path]


def _segment_length(p: SolPoint, q: SolPoint, steps: int) -> float:
    d = np.array([q.x - p.x, q.y - p.y, q.z - p.z])
    if not d.any():
        return 0.0
    edges = np.linspace(0.0, 1.0, steps + 1)
    mid, half = (edges[:-1] + edges[1:]) / 2, (edges[1] - edges[0]) / 2
    t = (mid[:, None] + half * _GL_NODES[None, :]).ravel()
    z = p.z + t * d[2]
    speed = np.sqrt(np.exp(2 * z) * d[0] ** 2 + np.exp(-2 * z) * d[1] ** 2 + d[2] ** 2)
    w = np.tile(_GL_WEIGHTS, steps) * half
    return float(speed @ w)


def sol_path_length(path: Sequence, steps: int = 1024) -> float:
    """Length of a chart polyline: 4-point Gauss-Legendre on ``steps`` cells per segment."""
    pts = _as_points(path)
    if len(pts) < 2:
        raise ValueError("a path needs at least two points")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    return sum(_segment_length(p, q, steps) for p, q in zip(pts, pts[1:]))


def richardson_gap(path: Sequence, steps: int) -> float:
    """Relative change of the length when ``steps`` is doubled."""
    a, b = sol_path_length(path, steps), sol_path_length(path, 2 * steps)
    return abs(b - a) / max(abs(b), 1e-300)


def _require_plane(*pts: SolPoint):
    for p in pts:
        if abs(p.z) > 1e-12:
            raise ValueError(f"{p} is not in the z = 0 plane")


def sol_lower_bound(p, q) -> float:
    """max(2 log|dx|, 2 log|dy|, 0) for two points of the z = 0 plane.

    Clamped at 0: the raw bound is negative (and empty) for separations below 1.
    """
    p, q = _as_points([p, q])
    _require_plane(p, q)
    best = 0.0
    for d in (abs(q.x - p.x), abs(q.y - p.y)):
        if d > 1:
            best = max(best, 2 * math.log(d))
    return best


def staircase_cost(dx: float, dy: float) -> float:
    """Closed-form length of the staircase path for displacement (dx, dy)."""
    X, Y = max(abs(dx), 1.0), max(abs(dy), 1.0)
    return 2 * math.log(X) + 2 * math.log(Y) + abs(dx) / X + abs(dy) / Y


def sol_upper_bound(p, q, steps: int = 256) -> PathEstimate:
    """Explicit witness path: down to z = -log X, across in x, up to z = log Y,
    across in y, back to z = 0 (X = max(|dx|, 1), Y = max(|dy|, 1))."""
    p, q = _as_points([p, q])
    _require_plane(p, q)
    dx, dy = q.x - p.x, q.y - p.y
    lo, hi = -math.log(max(abs(dx), 1.0)), math.log(max(abs(dy), 1.0))
    raw = [p, SolPoint(p.x, p.y, lo), SolPoint(q.x, p.y, lo), SolPoint(q.x, p.y, hi),
           SolPoint(q.x, q.y, hi), SolPoint(q.x, q.y, 0.0)]
    poly = [raw[0]]
    for pt in raw[1:]:
        if pt != poly[-1]:
            poly.append(pt)
    length = sol_path_length(poly, steps) if len(poly) > 1 else 0.0
    return PathEstimate(tuple(poly), length, staircase_cost(dx, dy))


# --------------------------------------------------------------------------
# lattice embedding


@dataclass(frozen=True, eq=False)
class LatticeEmbedding:
    """psi(v, k) = (f(v), k log lambda), with f(v_-) = e_1 and f(v_+) = e_2."""

    f: np.ndarray
    loglambda: float
    v_minus: np.ndarray
    v_plus: np.ndarray

    @classmethod
    def from_presentation(cls, p: Presentation) -> "LatticeEmbedding":
        if p.n != 2:
            raise HypothesisError("the Sol embedding needs n = 2")
        s = p.spectral
        if not (s.hyperbolic and s.all_positive and s.diagonalizable_over_R):
            raise HypothesisError(
                f"phi = {p.phi.literal()} needs real eigenvalues 0 < 1/lambda < 1 < lambda")
        lam = s.eigenvalues[0].real
        v_plus, v_minus = s.eigenbasis[:, 0], s.eigenbasis[:, 1]
        f = np.linalg.inv(np.column_stack([v_minus, v_plus]))
        return cls(f, math.log(lam), v_minus, v_plus)

    def __call__(self, g: Element) -> SolPoint:
        x, y = self.f @ np.asarray(g.v, dtype=float)
        return SolPoint(float(x), float(y), g.k * self.loglambda)


def embed(p: Presentation, g: Element) -> SolPoint:
    return LatticeEmbedding.from_presentation(p)(g)


def min_pairwise_gap(points: Sequence[SolPoint]) -> float:
    arr = np.array([pt.astuple() for pt in points])
    return float(spatial.distance.pdist(arr).min())


# --------------------------------------------------------------------------
# distortion of Z^2


@dataclass(frozen=True)
class DistortionRow:
    ax: int
    ay: int
    d_p: int
    l1: int

    @property
    def log_l1(self) -> float:
        return math.log(self.l1)


@dataclass(frozen=True)
class DistortionFit:
    """Largest C, anchored at the smallest-l1 samples, with d_P >= C log l1 + A."""

    C: float
    A: float
    rows: tuple[DistortionRow, ...]
    violations: tuple[DistortionRow, ...]
    doubling_increments: tuple[tuple[Vector, int], ...]

    @property
    def n_samples(self) -> int:
        return len(self.rows)

    def bound(self, l1: float) -> float:
        return self.C * math.log(l1) + self.A

    def summary(self) -> dict:
        return {"C": self.C, "A": self.A, "n_samples": self.n_samples}

    def csv_rows(self) -> list[list]:
        return [[r.ax, r.ay, r.d_p, r.l1, repr(r.log_l1)] for r in self.rows]


def distortion_check(p: Presentation, samples: Iterable[Sequence[int]] | None = None,
                     rmax: int = 14, ball: Ball | None = None) -> DistortionFit:
    """Fit d_P(1, a) >= C log ||a||_1 + A over lattice samples a.

    A = min d_P over the samples of least l1 and C is maximal given that
    anchor.  ``samples=None`` takes every nonzero (a, 0) within ``rmax``.
    """
    if p.n != 2:
        raise HypothesisError("distortion_check is defined for n = 2")
    b = ball if ball is not None else shared_ball(p, rmax)
    if b.radius < rmax:
        raise ValueError(f"ball radius {b.radius} is below rmax {rmax}")
    raw = b.raw()
    if samples is None:
        keys = sorted(key[:-1] for key, d in raw.items() if key[-1] == 0 and d <= rmax and any(key[:-1]))
    else:
        keys = sorted({tuple(a) for a in samples})
    rows = []
    for a in keys:
        if not any(a):
            raise ValueError("the zero vector has no lattice logarithm")
        d = raw.get(a + (0,))
        if d is None or d > rmax:
            raise ValueError(f"sample {a} is not reached within rmax = {rmax}")
        rows.append(DistortionRow(a[0], a[1], d, abs(a[0]) + abs(a[1])))
    logs = [r.log_l1 for r in rows]
    l0 = min(logs)
    if all(x == l0 for x in logs):
        raise ValueError("all samples have the same l1 norm; the fit is undefined")
    anchor = min(r.d_p for r in rows if r.log_l1 == l0)
    C = min((r.d_p - anchor) / (r.log_l1 - l0) for r in rows if r.log_l1 > l0)
    A = anchor - C * l0
    violations = tuple(r for r in rows if r.d_p < C * r.log_l1 + A - 1e-9)
    index = {(r.ax, r.ay): r.d_p for r in rows}
    doubling = []
    for (ax, ay), d in index.items():
        d2 = raw.get((2 * ax, 2 * ay, 0))
        if d2 is not None and d2 <= rmax:
            doubling.append(((ax, ay), d2 - d))
    return DistortionFit(C, A, tuple(rows), violations, tuple(doubling))
