"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import math
import random
import subprocess
import sys
import time
from itertools import product

import pytest

from polypack.cayley import ball, coset_distance, fit_growth
from polypack.cosetlab import ball_vs_clump_demo, coset_growth, half_distance_check, word_fiber_separated
from polypack.group import CyclicSubgroup, Element, Presentation, coset_rep
from polypack.orbits import SeparatedPair, find_separated_pair, intersection_sweep, packing_bound
from polypack.solgeo import distortion_check, sol_lower_bound, sol_upper_bound, staircase_cost
from polypack.spectral import adapted_norm


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nAC{n:02d} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return emit


def test_ac01_intersection_sweep(cat, report):
    t = time.perf_counter()
    rows = intersection_sweep(cat, 3, 25)
    elapsed = time.perf_counter() - t
    worst = max(r.count for r in rows)
    uncertified = sum(not r.certified for r in rows)
    ok = worst <= 2 and uncertified == 0 and elapsed <= 120
    report(1, ok, f"{len(rows)} triples, max count {worst}, {uncertified} uncertified, {elapsed:.1f}s")


def test_ac02_packing(cat, report):
    bound = packing_bound(cat, 2)
    rng = random.Random(0)
    box = list(product(range(-50, 51), repeat=2))
    found = 0
    for _ in range(1000):
        res = find_separated_pair(cat, rng.sample(box, 339), 2)
        found += isinstance(res, SeparatedPair) and res.profile.exceeds(2)
    report(2, bound == 338 and found == 1000, f"packing_bound(2) = {bound}, pairs found in {found}/1000")


def test_ac03_growth_dichotomy(report):
    t = time.perf_counter()
    fits = {lit: fit_growth(ball(Presentation.from_literal(lit), 14).counts)
            for lit in ("2,1;1,1", "1,1;0,1", "1,0;0,1")}
    elapsed = time.perf_counter() - t
    cat, heis, z3 = fits["2,1;1,1"], fits["1,1;0,1"], fits["1,0;0,1"]
    ok = (cat.model == "exponential" and cat.rate > 0 and cat.log_linear_correlation >= 0.99
          and heis.model == "polynomial" and abs(heis.degree - 4) <= 0.4
          and z3.model == "polynomial" and abs(z3.degree - 3) <= 0.3 and elapsed <= 600)
    report(3, ok, f"cat exp rate {cat.rate:.4f} corr {cat.log_linear_correlation:.5f}; "
                  f"heis degree {heis.degree:.3f}; Z^3 degree {z3.degree:.3f}; {elapsed:.1f}s")


def test_ac04_small_counts(cat, report):
    c = ball(cat, 2).counts
    report(4, c[1] == 7 and c[2] == 33, f"counts[1] = {c[1]}, counts[2] = {c[2]}")


def test_ac05_distortion(cat, report):
    fit = distortion_check(cat, rmax=14)
    cmd = [sys.executable, "-m", "polypack", "sol", "--matrix", "2,1;1,1", "--rmax", "14",
           "--format", "csv"]
    a = subprocess.run(cmd, capture_output=True, check=False)
    b = subprocess.run(cmd, capture_output=True, check=False)
    same = a.returncode == b.returncode == 0 and a.stdout == b.stdout and a.stdout
    ok = fit.C > 0 and not fit.violations and bool(same)
    report(5, ok, f"C = {fit.C:.4f}, A = {fit.A:.4f}, {fit.n_samples} samples, "
                  f"{len(fit.violations)} violations, identical reports: {bool(same)}")


def test_ac06_sol_sandwich(report):
    grid = (2, 10, 10 ** 2, 10 ** 3, 10 ** 4)
    worst_ratio, worst_quad, bad = 0.0, 0.0, []
    for dx in grid:
        for dy in grid:
            lo = sol_lower_bound((0, 0, 0), (dx, dy, 0))
            up = sol_upper_bound((0, 0, 0), (dx, dy, 0))
            exact = staircase_cost(dx, dy)
            rel = abs(up.length - exact) / exact
            worst_quad = max(worst_quad, rel)
            worst_ratio = max(worst_ratio, (up.length - 3) / lo)
            if not (lo <= up.length <= 2 * lo + 3 and rel <= 1e-6):
                bad.append((dx, dy))
    report(6, not bad, f"max (upper-3)/lower {worst_ratio:.4f}, max quadrature rel err "
                       f"{worst_quad:.2e}, failures {bad}")


def test_ac07_adapted_norm(report):
    n = adapted_norm("2,1;1,1", 0.1)
    ok = n.n_samples >= 10_000 and n.sampled_sup < 2.718034 and n.certified
    report(7, ok, f"sampled sup {n.sampled_sup:.6f} over {n.n_samples} directions, "
                  f"tail ratio {n.tail_ratio:.4f}")


def test_ac08_half_distance(cat, report):
    rng = random.Random(8)
    pairs, passed, tried = 0, 0, 0
    while pairs < 100:
        b = (rng.randint(-60, 60), rng.randint(-60, 60))
        tried += 1
        if not word_fiber_separated(cat, b, 4):
            continue
        pairs += 1
        v = half_distance_check(cat, (0, 0), b, 4)
        # pass means the truncated-BFS coset distance (or its lower bound) is >= D/2 = 2
        passed += v.passed
    report(8, passed == 100, f"{passed}/100 separated pairs at coset distance >= 2 ({tried} candidates)")


def test_ac09_coset_growth(cat, report):
    s = coset_growth(cat, None, 6, 40, distortion_check(cat, rmax=14))
    vals = s.values
    mono = all(a <= b for a, b in zip(vals, vals[1:]))
    fits = all(v <= s.B * s.alpha ** r + 1e-9 for r, v in enumerate(vals))
    demo = ball_vs_clump_demo(cat, None, 1, 100)
    at_one = sum(1 for d in demo.certified_distance if d == 1)
    spot = all(coset_distance(cat, None, (0, 0), v, 1) == 1 for v in demo.reps[:10])
    ok = mono and fits and math.isfinite(s.alpha) and at_one >= 100 and spot
    report(9, ok, f"f_H = {list(vals)} (exact {all(s.exact)}), B = {s.B}, alpha = {s.alpha:.4f}; "
                  f"demo {at_one} cosets at distance 1")


def test_ac10_group_axioms(report):
    rng = random.Random(10)
    mats = [Presentation.from_literal(m) for m in ("2,1;1,1", "1,1;0,1", "1,0;0,1", "0,1;1,0",
                                                    "1,1,0;1,2,1;0,1,2")]

    def rand_el(p):
        return Element(tuple(rng.randint(-50, 50) for _ in range(p.n)), rng.randint(-8, 8))

    bad = 0
    for _ in range(10_000):
        p = rng.choice(mats)
        a, b, c = rand_el(p), rand_el(p), rand_el(p)
        bad += p.mul(p.mul(a, b), c) != p.mul(a, p.mul(b, c))
        bad += p.mul(a, p.identity) != a or p.mul(a, p.inv(a)) != p.identity
    bad_rep = 0
    for _ in range(1000):
        p = rng.choice(mats)
        z = rand_el(p)
        h = CyclicSubgroup(Element(z.v, rng.choice((1, -1))))
        g = rand_el(p)
        rep = coset_rep(p, h, g)
        m = rng.randint(-6, 6)
        x = p.mul(p.inv(g), Element(rep, 0))
        bad_rep += coset_rep(p, h, p.mul(g, h.power(p, m))) != rep or x != h.power(p, x.k * h.sign)
    report(10, bad == 0 and bad_rep == 0, f"{bad} axiom failures in 1e4, {bad_rep} coset_rep failures in 1e3")
