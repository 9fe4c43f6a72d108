import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fltz.cohomology import (cohomology, euler_characteristic, exceptional_collection_check, ext_table,
                             graded_cohomology, hom_rank, k_class, k_class_orbit_pushforward, k_rank,
                             reduced_betti, serre_dual, spanning_family, verify_exact_triangle)
from fltz.fan import fixture, projective_space
from fltz.supportfn import LinearFunction, NotTransverse, SupportFunction, indicator, lattice_points

from oracles import chi_projective, cohomology_by_subsets

COMPLETE = ["p1", "p2", "p3", "blp2", "p1xp1"]


def O(n, d):
    return SupportFunction(projective_space(n), tuple([0] * n + [-d]))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_projective_space_cohomology(n):
    for d in range(-n - 3, 4):
        h = cohomology(O(n, d))
        chi = chi_projective(n, d)
        if d >= 0:
            assert h == (chi,) + (0,) * n
        elif d <= -n - 1:
            assert h == (0,) * n + ((-1) ** n * chi,)
        else:
            assert h == (0,) * (n + 1)
        assert euler_characteristic(O(n, d)) == chi


def test_p1xp1_euler_characteristic():
    fan = fixture("p1xp1")
    for a, b in itertools.product(range(-3, 3), repeat=2):
        assert euler_characteristic(SupportFunction(fan, (0, 0, -a, -b))) == (a + 1) * (b + 1)


def test_reduced_betti_of_circle_and_empty_set():
    fan = fixture("p2")
    full = (1 << 3) - 1
    assert reduced_betti(fan, full) == (0, 0, 1)
    assert reduced_betti(fan, 0) == (1, 0, 0)
    assert reduced_betti(fan, 0b101) == (0, 0, 0)
    assert reduced_betti(fixture("p1"), 0b11) == (0, 1)


@pytest.mark.parametrize("name", ["p1", "p2", "blp2", "p1xp1", "p3"])
def test_cohomology_matches_subset_oracle(name):
    fan = fixture(name)
    rng = np.random.default_rng(2)
    bound = 6 if fan.rank == 3 else 8
    for _ in range(12 if fan.rank < 3 else 4):
        vals = tuple(int(x) for x in rng.integers(-2, 3, size=len(fan.rays)))
        F = SupportFunction(fan, vals)
        assert cohomology(F) == cohomology_by_subsets(fan.rays, fan.max_cones, vals, bound)


def test_graded_pieces_sum_to_total():
    F = O(2, -3)
    graded = graded_cohomology(F)
    assert graded == {(-1, -1): (0, 0, 1)}
    assert cohomology(F) == (0, 0, 1)


@pytest.mark.parametrize("name", COMPLETE)
def test_serre_duality(name):
    fan = fixture(name)
    n = fan.rank
    rng = np.random.default_rng(9)
    for _ in range(15):
        F = SupportFunction(fan, tuple(int(x) for x in rng.integers(-3, 4, size=len(fan.rays))))
        assert cohomology(F) == tuple(reversed(cohomology(serre_dual(F))))
        assert euler_characteristic(F) == (-1) ** n * euler_characteristic(serre_dual(F))


@pytest.mark.parametrize("name", COMPLETE)
def test_h0_counts_lattice_points(name):
    fan = fixture(name)
    for vals in itertools.islice(itertools.product(range(-2, 2), repeat=len(fan.rays)), 0, None, 5):
        F = SupportFunction(fan, vals)
        assert cohomology(F)[0] == len(lattice_points(F))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=4, max_size=4), st.integers(-4, 4), st.integers(-4, 4))
def test_euler_characteristic_is_linear_invariant(vals, a, b):
    fan = fixture("blp2")
    F = SupportFunction(fan, tuple(vals))
    assert euler_characteristic(F) == euler_characteristic(F + LinearFunction((a, b)).on(fan))
    assert cohomology(F) == cohomology(F + LinearFunction((a, b)).on(fan))


def test_hom_ranks_on_projective_plane():
    assert hom_rank(O(2, 0), O(2, 2), 0) == 6
    assert hom_rank(O(2, 0), O(2, -3), 2) == 1
    table = ext_table([O(2, -2), O(2, -1), O(2, 0)])
    assert table[0][2] == (6, 0, 0)
    assert table[2][0] == (0, 0, 0)


@pytest.mark.parametrize("name", COMPLETE)
def test_spanning_family_has_full_rank(name):
    fan = fixture(name)
    fam = spanning_family(fan)
    assert len(fam) == len(fan.max_cones)
    assert k_rank([k_class(G) for G in fam]) == len(fam)


@pytest.mark.parametrize("name", COMPLETE)
def test_exact_triangle(name):
    fan = fixture(name)
    rng = np.random.default_rng(4)
    for alpha in range(len(fan.rays)):
        for _ in range(4):
            vals = [int(x) for x in rng.integers(-2, 3, size=len(fan.rays))]
            vals[alpha] = 0
            assert verify_exact_triangle(SupportFunction(fan, tuple(vals)), alpha)


def test_exact_triangle_requires_transverse():
    fan = fixture("p2")
    with pytest.raises(NotTransverse):
        verify_exact_triangle(indicator(fan, 0), 0)


def test_point_class_on_projective_plane():
    # the skyscraper at a fixed point has chi(O(d)|_pt) = 1 for every d
    fan = fixture("p2")
    pt = k_class_orbit_pushforward((0, 1), SupportFunction(fan, (0, 0, 0)))
    assert all(x == 1 for x in pt.vector)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_beilinson_collection(n):
    coll = [O(n, -j) for j in range(n, -1, -1)]
    res = exceptional_collection_check(coll)
    assert res["exceptional"] and res["full"] and res["k_rank"] == n + 1
    for i, j in itertools.product(range(n + 1), repeat=2):
        # Hom(O(-n+i), O(-n+j)) = H^0(O(j - i))
        expected = math.comb(j - i + n, n) if j >= i else 0
        assert hom_rank(coll[i], coll[j], 0) == expected
        assert all(hom_rank(coll[i], coll[j], p) == 0 for p in range(1, n + 1))


def test_non_exceptional_collection_flagged():
    res = exceptional_collection_check([O(2, 0), O(2, -1)])
    assert not res["exceptional"]
    assert res["violations"] == [(1, 0)]
