"""Acceptance criteria, one test per criterion.  Each records a PASS/FAIL line with timing."""

import itertools
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from fltz import cohomology as coh
from fltz import skeleton as skel
from fltz import smoothing as sm
from fltz.cocore_gen import beilinson_witness, generation_witness, is_cocore, verify_generation
from fltz.fan import blowup_partition, fixture, orlov_rank_check, projective_space, star_subdivision
from fltz.lattice import strict_lp_feasible
from fltz.supportfn import SupportFunction, lattice_points

from oracles import box_lattice_points, chi_projective, grid_chambers, grid_strict_feasible

RESULTS = []
COMPLETE = ["p1", "p2", "p3", "blp2", "p1xp1"]


def record(number, title, ok, elapsed, limit=None, detail=""):
    timing = f"{elapsed:.2f}s" + (f" (limit {limit:g}s)" if limit else "")
    status = "PASS" if ok else "FAIL"
    line = f"[{status}] criterion {number}: {title} -- {timing}" + (f"; {detail}" if detail else "")
    RESULTS.append(line)
    print(line)
    assert ok, line


def _clear_caches():
    for f in (skel._components, coh.reduced_betti, coh.reduced_euler_term, coh._chi_normalized,
              coh.spanning_family, coh._face_masks):
        f.cache_clear()


def test_criterion_1_projective_space_components():
    _clear_caches()
    t0 = time.perf_counter()
    ok = True
    for n in range(1, 5):
        fan = projective_space(n)
        comps = skel.stratum_components(fan, ())
        ok &= len(comps) == n
        for i, c in enumerate(comps, start=1):
            m = skel.cocore_divisor_of_point(fan, c.point)
            ok &= m == tuple([1] * n + [1 - i])
    elapsed = time.perf_counter() - t0
    record(1, "P^n zero-stratum components and cocore coefficients, n=1..4", ok and elapsed < 5, elapsed, 5)


def test_criterion_2_cocore_lp():
    t0 = time.perf_counter()
    fan = fixture("p2")
    ok = is_cocore(fan, (1, 1, 0)).feasible and is_cocore(fan, (1, 1, -1)).feasible
    ok &= not is_cocore(fan, (0, 0, 0)).feasible
    rng = random.Random(7)
    agree = 0
    for _ in range(200):
        m = [rng.randint(-3, 3) for _ in range(3)]
        k = [rng.randint(-4, 4) for _ in range(2)]
        shifted = [mi + sum(a * b for a, b in zip(k, r)) for mi, r in zip(m, fan.rays)]
        agree += is_cocore(fan, m).feasible == is_cocore(fan, shifted).feasible
    ok &= agree == 200
    elapsed = time.perf_counter() - t0
    record(2, "cocore LP on P^2 and 200 translation-invariance checks", ok and elapsed < 2, elapsed, 2,
           f"{agree}/200 invariant")


def test_criterion_3_generation():
    _clear_caches()
    t0 = time.perf_counter()
    ok = True
    counted = 0
    p3_time = 0.0
    for name in ["p1", "p2", "p3", "p1xp1", "blp2"]:
        fan = fixture(name)
        t1 = time.perf_counter()
        for sigma in fan.faces:
            for comp in skel.stratum_components(fan, sigma):
                w = generation_witness(fan, sigma, comp)
                ok &= len(w.leaves) == 2 ** len(sigma) and verify_generation(w)
                counted += 1
        if name == "p3":
            p3_time = time.perf_counter() - t1
    elapsed = time.perf_counter() - t0
    record(3, "generation witnesses verify in K-theory", ok and p3_time < 60, elapsed, 60,
           f"{counted} components, P^3 {p3_time:.2f}s")


def test_criterion_4_beilinson():
    t0 = time.perf_counter()
    ok = True
    for n in (1, 2, 3):
        res = beilinson_witness(n)
        ok &= res["check"]["exceptional"] and res["check"]["full"] and res["check"]["k_rank"] == n + 1
        fan = projective_space(n)
        bundles = [SupportFunction(fan, tuple([0] * n + [j])) for j in range(n, -1, -1)]  # O(-n) .. O(0)
        for i, j in itertools.product(range(n + 1), repeat=2):
            h = coh.cohomology(bundles[j] - bundles[i])
            expected = math.comb(j - i + n, n) if j >= i else 0
            ok &= h == (expected,) + (0,) * n
    elapsed = time.perf_counter() - t0
    record(4, "Beilinson collections on P^1..P^3 are full and exceptional; Hom ranks binomial", ok, elapsed)


def test_criterion_5_exact_triangle():
    t0 = time.perf_counter()
    ok = True
    checked = 0
    rng = np.random.default_rng(5)
    for name in COMPLETE:
        fan = fixture(name)
        for alpha in range(len(fan.rays)):
            for _ in range(30):
                vals = [int(x) for x in rng.integers(-3, 4, size=len(fan.rays))]
                vals[alpha] = 0
                ok &= coh.verify_exact_triangle(SupportFunction(fan, tuple(vals)), alpha)
                checked += 1
    elapsed = time.perf_counter() - t0
    record(5, "exact triangle O(F+F_a) -> O(F) -> O_a in K-theory", ok, elapsed, None,
           f"{checked} cases on {len(COMPLETE)} complete fixtures")


def test_criterion_6_cohomology_sanity():
    t0 = time.perf_counter()
    fan = fixture("p2")
    ok = all(coh.euler_characteristic(SupportFunction(fan, (0, 0, -d))) == (d + 1) * (d + 2) // 2
             for d in range(-3, 6))
    ok &= all(coh.euler_characteristic(SupportFunction(fan, (0, 0, -d))) == chi_projective(2, d)
              for d in range(-3, 6))
    serre = nef = 0
    for name in COMPLETE:
        f = fixture(name)
        n = f.rank
        for vals in itertools.product(range(-3, 4), repeat=len(f.rays)):
            F = SupportFunction(f, vals)
            h = coh.cohomology(F)
            ok &= h == tuple(reversed(coh.cohomology(coh.serre_dual(F))))
            serre += 1
            if F.is_nef():
                ok &= h[0] == len(lattice_points(F))
                ok &= all(x == 0 for x in h[1:]) or n == 0
                nef += 1
    elapsed = time.perf_counter() - t0
    record(6, "chi(P^2,O(d)), Serre duality, h^0 of nef classes", ok, elapsed, None,
           f"{serre} Serre pairs, {nef} nef classes")


def test_criterion_7_blowups():
    t0 = time.perf_counter()
    bl = star_subdivision(fixture("p2"), (1, 1))
    ok = set(bl.rays) == {(1, 0), (0, 1), (1, 1), (-1, -1)}
    part = blowup_partition(fixture("c3"), (0, 1, 2))
    a = part.alpha
    ok &= all(part.fiber_codim[(i, a)] == 1 for i in range(3))
    ok &= sorted(part.T) == [(0, a), (1, a), (2, a), (a,)]
    r1 = orlov_rank_check(fixture("p2"), (0, 1))
    r2 = orlov_rank_check(fixture("p1xp1"), (0, 1))
    ok &= r1["pass"] and (r1["blowup"], r1["expected"]) == (4, 4)
    ok &= r2["pass"] and (r2["blowup"], r2["expected"]) == (5, 5)
    elapsed = time.perf_counter() - t0
    record(7, "star subdivision, C^3 T-partition fiber codimensions, Orlov counts", ok, elapsed)


def test_criterion_8_smoothing():
    t0 = time.perf_counter()
    fan = fixture("p2")
    F = SupportFunction.from_divisor(fan, (1, 0, 1))
    S = sm.ConicalSmoother(F, 0.05)
    grad = sm.check_gradient_bound(S, count=300, seed=7, slack=1e-3)
    homog = sm.check_homogeneity(S, count=50, seed=7)
    fd = sm.check_finite_differences(S, count=100, seed=7, tol=1e-4)
    cof = sm.check_cofinal_positivity(F, 0.05, count=200, seed=7)
    slc = sm.check_slice_monotonicity(fixture("blp2"), 2, 0.05)
    ok = (grad.passed and grad.count == 300 and homog.passed
          and homog.details["max_relative_residual"] < 1e-6
          and fd.passed and fd.details["max_relative_error"] < 1e-4
          and cof.passed and cof.details["min_value"] > 0 and cof.count == 200
          and 1 - cof.details["eps_K0"] >= 1 / (4 * math.pi)
          and slc.passed and slc.details["min_derivative"] >= -1e-6)
    elapsed = time.perf_counter() - t0
    detail = (f"tightness {grad.details['tightness']:.3f}, homog {homog.details['max_relative_residual']:.1e}, "
              f"fd {fd.details['max_relative_error']:.1e}, cofinal min {cof.details['min_value']:.2e}, "
              f"slice min {slc.details['min_derivative']:.1e}")
    record(8, "smoothing bounds on P^2, D = D_(1,0) + D_(-1,-1), eps = 0.05", ok and elapsed < 30,
           elapsed, 30, detail)


def test_criterion_9_oracles():
    _clear_caches()
    t0 = time.perf_counter()
    ok = True
    strata_checked = 0
    for name in ["p1", "p2", "p3", "blp2", "c3", "c3bl", "p1xp1"]:
        fan = fixture(name)
        for sigma in fan.faces:
            arr = skel.toral_arrangement(fan, sigma)
            d = arr.stratum.torus_dim
            if not 1 <= d <= 3:
                continue
            comps = skel.stratum_components(fan, sigma)
            ok &= (sum(len(c.chambers) for c in comps), len(comps)) == grid_chambers(arr.covectors, d)
            strata_checked += 1
    rng = random.Random(9)
    lp_checked = 0
    for dim in (1, 2, 3):
        for _ in range(40 if dim < 3 else 20):
            cons = [(tuple(int(i == j) for j in range(dim)), -3, 3) for i in range(dim)]
            for _ in range(rng.randint(1, 4)):
                lo = rng.randint(-3, 2)
                cons.append((tuple(rng.randint(-2, 2) for _ in range(dim)), lo, lo + rng.randint(1, 2)))
            res = strict_lp_feasible(cons, dim)
            grid = grid_strict_feasible(cons, dim, box=3, q=24)
            width = max(sum(abs(x) for x in a) for a, _, _ in cons)
            ok &= (not grid or res.feasible)
            if res.feasible and res.slack > Fraction(width, 48):
                ok &= grid
            lp_checked += 1
    lp_count = 0
    for name in COMPLETE:
        fan = fixture(name)
        for vals in itertools.islice(itertools.product(range(-2, 2), repeat=len(fan.rays)), 0, None, 3):
            F = SupportFunction(fan, vals)
            ok &= lattice_points(F) == box_lattice_points(fan.rays, vals, 9)
            lp_count += 1
    elapsed = time.perf_counter() - t0
    record(9, "chambers, strict LP and lattice points agree with brute-force oracles", ok, elapsed, None,
           f"{strata_checked} strata, {lp_checked} LPs, {lp_count} polytopes")
