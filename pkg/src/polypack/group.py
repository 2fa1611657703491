"""Exact arithmetic in P = Z^n x|_phi Z.

Convention: an :class:`Element` ``(v, k)`` is the normal form ``a * t^k`` with
``a = v`` in Z^n, and ``t a t^-1 = phi(a)``.  Hence

    (v, k) * (w, m) = (v + phi^k(w), k + m)
    (v, k)^-1       = (-phi^-k(v), -k)

Every module uses this left convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import NotUnimodularError
from .spectral import IntMatrix, SpectralDecomposition, as_int_matrix, mat_pow, spectral_decompose

Vector = tuple[int, ...]


@dataclass(frozen=True, order=True)
class Element:
    v: Vector
    k: int

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(int(x) for x in self.v))
        object.__setattr__(self, "k", int(self.k))

    @classmethod
    def parse(cls, literal: str) -> "Element":
        """Parse ``"5,7|3"`` into ``((5, 7), 3)``."""
        try:
            vec, k = literal.strip().split("|")
            return cls(tuple(int(x) for x in vec.split(",")), int(k))
        except ValueError:
            raise ValueError(f"bad element literal {literal!r}; expected 'v1,...,vn|k'") from None

    def __str__(self):
        return ",".join(map(str, self.v)) + f"|{self.k}"

    def key(self) -> tuple[int, ...]:
        """Flat tuple ``(*v, k)`` used as a BFS key."""
        return self.v + (self.k,)

    @classmethod
    def from_key(cls, key: Sequence[int]) -> "Element":
        return cls(tuple(key[:-1]), key[-1])


def vadd(a: Sequence[int], b: Sequence[int]) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Sequence[int], b: Sequence[int]) -> Vector:
    return tuple(x - y for x, y in zip(a, b))


def vneg(a: Sequence[int]) -> Vector:
    return tuple(-x for x in a)


@dataclass(frozen=True)
class Presentation:
    """``<Z^n, t : t a t^-1 = phi(a)>`` with generators e_i^(+-1), t^(+-1)."""

    phi: IntMatrix

    def __post_init__(self):
        phi = as_int_matrix(self.phi)
        d = phi.det()
        if abs(d) != 1:
            raise NotUnimodularError(f"det({phi.literal()}) = {d}; phi must satisfy |det| = 1")
        object.__setattr__(self, "phi", phi)

    @classmethod
    def from_literal(cls, literal: str) -> "Presentation":
        return cls(IntMatrix.parse(literal))

    @property
    def n(self) -> int:
        return self.phi.n

    @cached_property
    def spectral(self) -> SpectralDecomposition:
        return spectral_decompose(self.phi)

    @property
    def identity(self) -> Element:
        return Element((0,) * self.n, 0)

    @cached_property
    def generators(self) -> tuple[Element, ...]:
        gens = []
        for i in range(self.n):
            e = tuple(int(i == j) for j in range(self.n))
            gens += [Element(e, 0), Element(vneg(e), 0)]
        zero = (0,) * self.n
        gens += [Element(zero, 1), Element(zero, -1)]
        return tuple(gens)

    def phi_power(self, k: int) -> IntMatrix:
        return mat_pow(self.phi, k)

    def act(self, k: int, v: Sequence[int]) -> Vector:
        """phi^k(v), exact."""
        if k == 0:
            return tuple(v)
        return self.phi_power(k).apply(v)

    def element(self, v: Iterable[int], k: int = 0) -> Element:
        v = tuple(v)
        if len(v) != self.n:
            raise ValueError(f"expected a vector of length {self.n}, got {v}")
        return Element(v, k)

    def mul(self, g: Element, h: Element) -> Element:
        return Element(vadd(g.v, self.act(g.k, h.v)), g.k + h.k)

    def inv(self, g: Element) -> Element:
        return Element(vneg(self.act(-g.k, g.v)), -g.k)

    def pow(self, g: Element, m: int) -> Element:
        result, base = self.identity, g if m >= 0 else self.inv(g)
        m = abs(m)
        while m:
            if m & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            m >>= 1
        return result

    def word(self, letters: Iterable[Element]) -> Element:
        g = self.identity
        for x in letters:
            g = self.mul(g, x)
        return g


@dataclass(frozen=True)
class CyclicSubgroup:
    """H = <z t^s> with s = +-1; the default generator is t itself."""

    generator: Element

    def __post_init__(self):
        if self.generator.k not in (1, -1):
            raise ValueError(f"generator must have t-exponent +-1, got {self.generator}")

    @classmethod
    def stable_letter(cls, n: int) -> "CyclicSubgroup":
        return cls(Element((0,) * n, 1))

    @property
    def sign(self) -> int:
        return self.generator.k

    @property
    def z(self) -> Vector:
        return self.generator.v

    def is_stable_letter(self) -> bool:
        return self.generator.k == 1 and not any(self.generator.v)

    def power(self, p: Presentation, m: int) -> Element:
        return p.pow(self.generator, m)

    def members(self, p: Presentation, window: int) -> list[Element]:
        return [self.power(p, m) for m in range(-window, window + 1)]


def default_subgroup(p: Presentation, h: CyclicSubgroup | None) -> CyclicSubgroup:
    return CyclicSubgroup.stable_letter(p.n) if h is None else h


def mul(p: Presentation, g: Element, h: Element) -> Element:
    return p.mul(g, h)


def inv(p: Presentation, g: Element) -> Element:
    return p.inv(g)


def coset_rep(p: Presentation, h: CyclicSubgroup | None, g: Element) -> Vector:
    """The unique t-exponent-0 member of the left coset gH, as a Z^n vector."""
    h = default_subgroup(p, h)
    if h.is_stable_letter():
        return g.v
    return p.mul(g, h.power(p, -g.k * h.sign)).v
