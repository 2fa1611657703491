"""Exact integer matrices and floating-point spectral data for automorphisms of Z^n.

Matrix powers and inverses stay in Python integers; eigenvalues, eigenbases and
norms use binary64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import AmbiguousOrbitError, CertificationError, HypothesisError, NotUnimodularError

UNIT_CIRCLE_TOL = 1e-9
BASIS_COND_LIMIT = 1e8


@dataclass(frozen=True)
class IntMatrix:
    """Square matrix of arbitrary-precision integers, stored row-major."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(_as_int(x) for x in row) for row in self.rows)
        if not rows or any(len(row) != len(rows) for row in rows):
            raise ValueError(f"matrix must be square and non-empty, got {self.rows!r}")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def parse(cls, literal: str) -> "IntMatrix":
        """Parse ``"2,1;1,1"`` (rows split on ';', entries on ',')."""
        try:
            rows = [[int(tok) for tok in row.split(",")] for row in literal.strip().split(";")]
        except ValueError as exc:
            raise ValueError(f"bad matrix literal {literal!r}: {exc}") from None
        return cls(tuple(map(tuple, rows)))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.rows)

    def literal(self) -> str:
        return ";".join(",".join(str(x) for x in row) for row in self.rows)

    def __str__(self):
        return self.literal()

    def __matmul__(self, other):
        if isinstance(other, IntMatrix):
            cols = list(zip(*other.rows))
            return IntMatrix(tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in cols)
                                   for row in self.rows))
        return self.apply(other)

    def apply(self, v: Sequence[int]) -> tuple[int, ...]:
        if len(v) != self.n:
            raise ValueError(f"vector of length {len(v)} for {self.n}x{self.n} matrix")
        return tuple(sum(a * b for a, b in zip(row, v)) for row in self.rows)

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.rows)

    def trace(self) -> int:
        return sum(self.rows[i][i] for i in range(self.n))

    def det(self) -> int:
        return _bareiss_det([list(r) for r in self.rows])

    def is_unimodular(self) -> bool:
        return abs(self.det()) == 1

    def adjugate(self) -> "IntMatrix":
        n = self.n
        if n == 1:
            return IntMatrix(((1,),))
        cof = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                minor = [r[:j] + r[j + 1:] for k, r in enumerate(self.rows) if k != i]
                cof[i][j] = (-1) ** (i + j) * _bareiss_det([list(r) for r in minor])
        return IntMatrix(tuple(tuple(cof[j][i] for j in range(n)) for i in range(n)))

    def inverse(self) -> "IntMatrix":
        """Exact inverse; only defined over Z when |det| = 1."""
        d = self.det()
        if abs(d) != 1:
            raise NotUnimodularError(f"det = {d}; no integer inverse for {self.literal()}")
        adj = self.adjugate()
        return IntMatrix(tuple(tuple(d * x for x in row) for row in adj.rows))

    def to_numpy(self) -> np.ndarray:
        return np.array(self.rows, dtype=float)


def _as_int(x) -> int:
    if isinstance(x, (bool,)):
        return int(x)
    if isinstance(x, int):
        return x
    if isinstance(x, (float, np.floating)) and float(x).is_integer():
        return int(x)
    if isinstance(x, np.integer):
        return int(x)
    raise ValueError(f"non-integer matrix entry {x!r}")


def _bareiss_det(a: list[list[int]]) -> int:
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def as_int_matrix(m) -> IntMatrix:
    if isinstance(m, IntMatrix):
        return m
    if isinstance(m, str):
        return IntMatrix.parse(m)
    return IntMatrix(tuple(tuple(row) for row in m))


@lru_cache(maxsize=4096)
def _pow_nonneg(m: IntMatrix, k: int) -> IntMatrix:
    if k == 0:
        return IntMatrix.identity(m.n)
    if k == 1:
        return m
    half = _pow_nonneg(m, k // 2)
    sq = half @ half
    return sq @ m if k % 2 else sq


def mat_pow(m, k: int) -> IntMatrix:
    """Exact ``m**k``; negative ``k`` requires a unimodular matrix."""
    m = as_int_matrix(m)
    if k >= 0:
        return _pow_nonneg(m, k)
    return _pow_nonneg(_inverse_cached(m), -k)


@lru_cache(maxsize=256)
def _inverse_cached(m: IntMatrix) -> IntMatrix:
    return m.inverse()


# --------------------------------------------------------------------------
# spectral data


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    matrix: IntMatrix
    eigenvalues: tuple[complex, ...]
    eigenbasis: np.ndarray = field(repr=False)
    exact: bool
    basis_reliable: bool
    rho: float
    hyperbolic: bool
    diagonalizable_over_R: bool
    all_real: bool
    all_positive: bool
    dim_minus: int
    dim_plus: int
    dim_zero: int

    @property
    def n(self) -> int:
        return self.matrix.n

    def real_eigenvalues(self) -> np.ndarray:
        if not self.all_real:
            raise HypothesisError("spectrum is not real")
        return np.array([ev.real for ev in self.eigenvalues])

    def to_dict(self) -> dict:
        if self.all_real:
            evs = [ev.real for ev in self.eigenvalues]
        else:
            evs = [[ev.real, ev.imag] for ev in self.eigenvalues]
        return {
            "eigenvalues": evs,
            "rho": self.rho,
            "flags": {
                "hyperbolic": self.hyperbolic,
                "diagonalizable_over_R": self.diagonalizable_over_R,
                "all_real": self.all_real,
                "all_positive": self.all_positive,
                "exact_closed_form": self.exact,
                "eigenbasis_reliable": self.basis_reliable,
            },
            "splitting": {"E_minus": self.dim_minus, "E_plus": self.dim_plus, "E_zero": self.dim_zero},
        }


def _unit_vector(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    i = int(np.argmax(np.abs(v)))
    return -v if v[i].real < 0 else v


def _eig_2x2(m: IntMatrix):
    (a, b), (c, d) = m.rows
    tr, det = a + d, a * d - b * c
    disc = tr * tr - 4 * det
    if disc > 0:
        s = math.sqrt(disc)
        q = (tr + math.copysign(s, tr)) / 2 if tr != 0 else s / 2
        lams = [q, det / q]
        vecs = []
        for lam in lams:
            u = np.array([b, lam - a], dtype=float)
            w = np.array([lam - d, c], dtype=float)
            vecs.append(_unit_vector(u if np.linalg.norm(u) >= np.linalg.norm(w) else w))
        return lams, np.column_stack(vecs), True
    if disc == 0:
        lam = tr / 2
        if b == 0 and c == 0:
            return [lam, lam], np.eye(2), True
        return [lam, lam], None, False
    re, im = tr / 2, math.sqrt(-disc) / 2
    lams = [complex(re, im), complex(re, -im)]
    _, vecs = np.linalg.eig(m.to_numpy())
    return lams, vecs, True


def spectral_decompose(m, cond_limit: float = BASIS_COND_LIMIT) -> SpectralDecomposition:
    """Eigenvalues (sorted by |lambda| descending), eigenbasis and flags."""
    m = as_int_matrix(m)
    n = m.n
    if n == 2:
        lams, basis, reliable = _eig_2x2(m)
        exact = True
    else:
        w, basis = np.linalg.eig(m.to_numpy())
        lams = list(w)
        exact = False
        reliable = True
    lams = [complex(x) for x in lams]
    order = sorted(range(n), key=lambda i: (-abs(lams[i]), -lams[i].real, -lams[i].imag))
    lams = [lams[i] for i in order]
    if basis is not None:
        basis = np.asarray(basis)[:, order]
        cond = np.linalg.cond(basis)
        reliable = reliable and bool(np.isfinite(cond) and cond < cond_limit)
    if basis is None or not reliable:
        basis = np.full((n, n), np.nan)
        reliable = False

    scale = [max(1.0, abs(x)) for x in lams]
    all_real = all(abs(x.imag) <= UNIT_CIRCLE_TOL * s for x, s in zip(lams, scale))
    if all_real:
        lams = [complex(x.real, 0.0) for x in lams]
        if reliable:
            basis = np.real(basis)
            basis = np.column_stack([_unit_vector(basis[:, i]) for i in range(n)])
    mods = [abs(x) for x in lams]
    dim_minus = sum(1 for r in mods if r < 1 - UNIT_CIRCLE_TOL)
    dim_plus = sum(1 for r in mods if r > 1 + UNIT_CIRCLE_TOL)
    dim_zero = n - dim_minus - dim_plus
    return SpectralDecomposition(
        matrix=m,
        eigenvalues=tuple(lams),
        eigenbasis=basis,
        exact=exact,
        basis_reliable=reliable,
        rho=max(mods),
        hyperbolic=dim_zero == 0,
        diagonalizable_over_R=all_real and reliable,
        all_real=all_real,
        all_positive=all_real and all(x.real > 0 for x in lams),
        dim_minus=dim_minus,
        dim_plus=dim_plus,
        dim_zero=dim_zero,
    )


# --------------------------------------------------------------------------
# adapted norm


@dataclass(frozen=True, eq=False)
class AdaptedNorm:
    """N(v) = sum_i (rho+delta)^-i ||M^i v||_2 for i = 0..window.

    ``sampled_sup`` is the largest N(Mv)/N(v) seen over ``n_samples``
    directions; ``tail_ratio`` is ||M^(window+1)||_2 / (rho+delta)^(window+1),
    and ``tail_ratio < 1`` forces N(Mv) < (rho+delta) N(v) for every v.
    """

    matrix: np.ndarray = field(repr=False)
    rho: float
    delta: float
    window: int
    weights: tuple[float, ...]
    tail_ratio: float
    sampled_sup: float
    n_samples: int
    seed: int

    @property
    def bound(self) -> float:
        return self.rho + self.delta

    @property
    def certified(self) -> bool:
        return self.sampled_sup < self.bound and self.tail_ratio < 1.0

    def __call__(self, v) -> np.ndarray | float:
        v = np.asarray(v, dtype=float)
        total = np.zeros(v.shape[:-1])
        x = v
        for w in self.weights:
            total = total + w * np.linalg.norm(x, axis=-1)
            x = x @ self.matrix.T
        return total if total.ndim else float(total)

    def ratio(self, v) -> np.ndarray | float:
        v = np.asarray(v, dtype=float)
        return self(v @ self.matrix.T) / self(v)

    def equivalence_constant(self) -> float:
        """C with ||v||/C <= N(v) <= C ||v|| for all v."""
        upper, p = 0.0, np.eye(self.matrix.shape[0])
        for w in self.weights:
            upper += w * np.linalg.norm(p, 2)
            p = self.matrix @ p
        return max(upper, 1.0)

    def certificate(self) -> dict:
        return {"rho": self.rho, "delta": self.delta, "bound": self.bound, "window": self.window,
                "sampled_sup": self.sampled_sup, "n_samples": self.n_samples,
                "tail_ratio": self.tail_ratio, "certified": self.certified, "seed": self.seed}


def adapted_norm(m, delta: float, *, max_window: int = 500, n_samples: int = 10_000,
                 seed: int = 0) -> AdaptedNorm:
    """Build and certify a norm whose operator norm for ``m`` is below rho + delta.

    ``m`` may be an :class:`IntMatrix`, a literal, or any real square array.
    Raises :class:`CertificationError` when no window up to ``max_window`` works.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if isinstance(m, (IntMatrix, str)):
        im = as_int_matrix(m)
        a = im.to_numpy()
        rho = spectral_decompose(im).rho
    else:
        a = np.asarray(m, dtype=float)
        rho = float(max(abs(np.linalg.eigvals(a))))
    n = a.shape[0]
    base = rho + delta
    scaled = a / base
    p = scaled.copy()
    window = None
    tail = math.inf
    for k in range(max_window + 1):
        tail = float(np.linalg.norm(p, 2))
        if tail < 1.0:
            window = k
            break
        p = scaled @ p
    if window is None:
        raise CertificationError(
            f"adapted norm not certified for delta={delta} within window {max_window} "
            f"(last tail ratio {tail:.6g})")
    weights = tuple(base ** -i for i in range(window + 1))
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n_samples, n))
    dirs = np.vstack([dirs, np.eye(n), -np.eye(n)])
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    norm = AdaptedNorm(a, rho, delta, window, weights, tail, 0.0, len(dirs), seed)
    sup = float(np.max(norm.ratio(dirs)))
    norm = AdaptedNorm(a, rho, delta, window, weights, tail, sup, len(dirs), seed)
    if not norm.certified:
        raise CertificationError(f"sampled operator ratio {sup} is not below {base}")
    return norm


# --------------------------------------------------------------------------
# orbit classification


class OrbitKind(str, Enum):
    FORWARD_CONTRACTING = "forward_contracting"
    BACKWARD_CONTRACTING = "backward_contracting"
    BIDIRECTIONALLY_DIVERGENT = "bidirectionally_divergent"


@dataclass(frozen=True)
class OrbitClass:
    kind: OrbitKind
    forward_rate: float
    backward_rate: float
    stable_fraction: float
    unstable_fraction: float


def _mean_rate(a: np.ndarray, v: np.ndarray, steps: int) -> float:
    logs = 0.0
    x = v
    for _ in range(steps):
        y = a @ x
        logs += math.log(np.linalg.norm(y) / np.linalg.norm(x))
        x = y
    return math.exp(logs / steps)


def classify_orbit(s: SpectralDecomposition, v, *, tol: float = 1e-8, steps: int = 8) -> OrbitClass:
    """Place ``v`` in E-, E+ or neither and measure per-step growth rates.

    The rates are geometric means of ||M x|| / ||x|| over ``steps`` forward
    (resp. inverse) iterates; the window is kept short because round-off in
    the unstable direction grows like rho^steps.
    """
    if not s.hyperbolic:
        raise HypothesisError(f"{s.matrix.literal()} is not hyperbolic")
    if not s.basis_reliable:
        raise HypothesisError("eigenbasis is unreliable (numerically defective matrix)")
    v = np.asarray(v, dtype=float)
    vn = np.linalg.norm(v)
    if vn == 0:
        raise ValueError("the zero vector has no orbit class")
    basis = s.eigenbasis
    coords = np.linalg.solve(basis, v.astype(basis.dtype))
    minus = [i for i, ev in enumerate(s.eigenvalues) if abs(ev) < 1]
    plus = [i for i, ev in enumerate(s.eigenvalues) if abs(ev) > 1]
    proj_minus = np.real(basis[:, minus] @ coords[minus]) if minus else np.zeros_like(v)
    proj_plus = np.real(basis[:, plus] @ coords[plus]) if plus else np.zeros_like(v)
    f_minus = float(np.linalg.norm(proj_minus) / vn)
    f_plus = float(np.linalg.norm(proj_plus) / vn)
    in_minus, in_plus = f_plus <= tol, f_minus <= tol
    if in_minus and in_plus:
        raise AmbiguousOrbitError("vector is within tolerance of both E- and E+")
    a = s.matrix.to_numpy()
    fwd = _mean_rate(a, v, steps)
    bwd = _mean_rate(np.linalg.inv(a), v, steps)
    if in_minus:
        kind = OrbitKind.FORWARD_CONTRACTING
    elif in_plus:
        kind = OrbitKind.BACKWARD_CONTRACTING
    else:
        kind = OrbitKind.BIDIRECTIONALLY_DIVERGENT
    return OrbitClass(kind, fwd, bwd, f_minus, f_plus)
