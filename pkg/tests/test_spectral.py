import math
import random

import numpy as np
import pytest
import sympy

from polypack.errors import CertificationError, HypothesisError, NotUnimodularError
from polypack.spectral import (IntMatrix, OrbitKind, adapted_norm, classify_orbit, mat_pow,
                               spectral_decompose)

GOLD = (1 + math.sqrt(5)) / 2


def random_unimodular(rng, n, steps=6):
    m = sympy.eye(n)
    for _ in range(steps):
        i, j = rng.sample(range(n), 2)
        e = sympy.eye(n)
        e[i, j] = rng.choice([-1, 1])
        m = m * e
    if rng.random() < 0.5:
        m[0, :] = -m[0, :]
    return m


def to_int(m):
    return IntMatrix(tuple(tuple(int(x) for x in m.row(i)) for i in range(m.shape[0])))


class TestIntMatrix:
    def test_parse_roundtrip(self):
        m = IntMatrix.parse("2,1;1,1")
        assert m.rows == ((2, 1), (1, 1))
        assert m.literal() == "2,1;1,1"

    @pytest.mark.parametrize("bad", ["", "1,2;3", "a,b;c,d", "1,2,3"])
    def test_parse_rejects(self, bad):
        with pytest.raises(ValueError):
            IntMatrix.parse(bad)

    def test_det_matches_sympy(self):
        rng = random.Random(1)
        for _ in range(30):
            n = rng.randint(1, 4)
            rows = [[rng.randint(-5, 5) for _ in range(n)] for _ in range(n)]
            assert IntMatrix(tuple(map(tuple, rows))).det() == sympy.Matrix(rows).det()

    def test_inverse_requires_unimodular(self):
        with pytest.raises(NotUnimodularError):
            IntMatrix.parse("2,0;0,1").inverse()


class TestMatPow:
    @pytest.mark.parametrize("k,expected", [(2, "5,3;3,2"), (0, "1,0;0,1"), (-1, "1,-1;-1,2")])
    def test_examples(self, k, expected):
        assert mat_pow(IntMatrix.parse("2,1;1,1"), k) == IntMatrix.parse(expected)

    def test_matches_sympy_powers(self):
        rng = random.Random(7)
        for _ in range(20):
            n = rng.randint(2, 4)
            m = random_unimodular(rng, n)
            for k in range(-6, 7):
                assert mat_pow(to_int(m), k) == to_int(m ** k)

    def test_big_power_is_exact(self):
        # Fibonacci numbers: [[1,1],[1,0]]^k = [[F(k+1), F(k)], [F(k), F(k-1)]]
        fib = [0, 1]
        while len(fib) < 303:
            fib.append(fib[-1] + fib[-2])
        m = mat_pow(IntMatrix.parse("1,1;1,0"), 300)
        assert m.rows == ((fib[301], fib[300]), (fib[300], fib[299]))

    def test_negative_power_of_singular_raises(self):
        with pytest.raises(NotUnimodularError):
            mat_pow(IntMatrix.parse("2,0;0,1"), -1)


class TestSpectral:
    def test_cat_map(self):
        s = spectral_decompose("2,1;1,1")
        evs = sorted(ev.real for ev in s.eigenvalues)
        assert evs == pytest.approx([(3 - math.sqrt(5)) / 2, (3 + math.sqrt(5)) / 2], abs=1e-12)
        assert s.hyperbolic and s.all_real and s.all_positive
        assert s.rho == pytest.approx(GOLD ** 2)
        assert (s.dim_minus, s.dim_plus, s.dim_zero) == (1, 1, 0)

    def test_identity(self):
        s = spectral_decompose("1,0;0,1")
        assert [ev.real for ev in s.eigenvalues] == [1.0, 1.0]
        assert not s.hyperbolic
        assert s.dim_zero == 2

    def test_swap(self):
        s = spectral_decompose("0,1;1,0")
        assert sorted(ev.real for ev in s.eigenvalues) == pytest.approx([-1, 1])
        assert not s.hyperbolic and not s.all_positive

    def test_eigenpairs_reconstruct(self):
        s = spectral_decompose("2,1,0;1,1,1;0,1,3")
        a = s.matrix.to_numpy()
        for i, ev in enumerate(s.eigenvalues):
            v = s.eigenbasis[:, i]
            assert np.allclose(a @ v, ev * v, atol=1e-9)

    def test_report_fields(self):
        d = spectral_decompose("2,1;1,1").to_dict()
        assert set(d) == {"eigenvalues", "rho", "flags", "splitting"}


class TestAdaptedNorm:
    def test_cat_map(self):
        n = adapted_norm("2,1;1,1", 0.1)
        assert n.certified and n.sampled_sup < 2.718034
        assert n.n_samples >= 10_000

    def test_heisenberg(self):
        n = adapted_norm("1,1;0,1", 0.5)
        assert n.certified and n.sampled_sup < 1.5
        # Euclidean operator norm is the golden ratio, so a window is needed
        assert n.window >= 1

    @pytest.mark.parametrize("delta", [0.01, 0.5, 2.0])
    def test_identity_uses_euclidean(self, delta):
        n = adapted_norm("1,0;0,1", delta)
        assert n.window == 0
        assert n.sampled_sup == pytest.approx(1.0)

    def test_two_sided_equivalence(self):
        n = adapted_norm("1,1;0,1", 0.5)
        c = n.equivalence_constant()
        v = np.random.default_rng(3).standard_normal((10_000, 2))
        e = np.linalg.norm(v, axis=1)
        nv = n(v)
        assert np.all(e / c <= nv + 1e-12) and np.all(nv <= c * e + 1e-12)

    def test_tail_certificate_holds_beyond_samples(self):
        # tail_ratio < 1 proves the bound everywhere; probe fresh directions
        n = adapted_norm("2,1;1,1", 0.1)
        v = np.random.default_rng(99).standard_normal((5000, 2))
        assert np.max(n.ratio(v)) < n.bound

    def test_uncertifiable(self):
        # Jordan block with huge off-diagonal and tiny delta: window exhausts quickly
        with pytest.raises(CertificationError):
            adapted_norm("1,1000;0,1", 1e-6, max_window=5)

    def test_delta_must_be_positive(self):
        with pytest.raises(ValueError):
            adapted_norm("2,1;1,1", 0.0)


class TestClassifyOrbit:
    def setup_method(self):
        self.s = spectral_decompose("2,1;1,1")
        r = [ev.real for ev in self.s.eigenvalues]
        self.v_plus = self.s.eigenbasis[:, r.index(max(r))].real
        self.v_minus = self.s.eigenbasis[:, r.index(min(r))].real

    def test_stable(self):
        c = classify_orbit(self.s, self.v_minus)
        assert c.kind is OrbitKind.FORWARD_CONTRACTING
        assert c.forward_rate == pytest.approx((3 - math.sqrt(5)) / 2, abs=1e-6)

    def test_unstable(self):
        c = classify_orbit(self.s, self.v_plus)
        assert c.kind is OrbitKind.BACKWARD_CONTRACTING

    def test_generic(self):
        c = classify_orbit(self.s, self.v_plus + self.v_minus)
        assert c.kind is OrbitKind.BIDIRECTIONALLY_DIVERGENT

    def test_not_hyperbolic(self):
        with pytest.raises(HypothesisError):
            classify_orbit(spectral_decompose("1,1;0,1"), [1, 0])

    def test_zero(self):
        with pytest.raises(ValueError):
            classify_orbit(self.s, [0, 0])
