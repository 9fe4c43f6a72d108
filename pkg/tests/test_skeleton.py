from fractions import Fraction

import numpy as np
import pytest

from fltz.fan import fixture, projective_space
from fltz.skeleton import (OnSingularLocus, PointOnSingularLocus, NotInSkeleton, classify_point,
                           cocore_divisor_of_point, stratum, stratum_components, strata, toral_arrangement)

from oracles import grid_chambers

ALL = ["p1", "p2", "p3", "blp2", "c3", "c3bl", "p1xp1"]


def test_stratum_dimensions():
    fan = fixture("p3")
    for s in strata(fan):
        assert s.base_dim + s.torus_dim == fan.rank
    assert stratum(fan, (0, 1)).torus_dim == 1


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_projective_space_zero_stratum(n):
    fan = projective_space(n)
    comps = stratum_components(fan, ())
    assert len(comps) == n
    for i, c in enumerate(comps, start=1):
        assert c.index == i
        assert c.point == tuple([Fraction(i, n + 1)] * n)
        assert cocore_divisor_of_point(fan, c.point) == tuple([1] * n + [1 - i])


def test_projective_plane_ray_stratum_is_connected():
    # the torus circle of a ray meets the two adjacent rays at the same point
    assert len(stratum_components(fixture("p2"), (0,))) == 1


@pytest.mark.parametrize("name,expected", [
    ("blp2", {(): 2}),
    ("p1xp1", {(): 1, (0,): 1}),
])
def test_component_counts(name, expected):
    fan = fixture(name)
    for cone, count in expected.items():
        assert len(stratum_components(fan, cone)) == count


@pytest.mark.parametrize("name", ALL)
def test_chamber_and_component_counts_match_grid_oracle(name):
    fan = fixture(name)
    for sigma in fan.faces:
        arr = toral_arrangement(fan, sigma)
        d = arr.stratum.torus_dim
        if d == 0 or d > 3:
            continue
        comps = stratum_components(fan, sigma)
        chambers = sum(len(c.chambers) for c in comps)
        assert (chambers, len(comps)) == grid_chambers(arr.covectors, d)


def test_classification_examples():
    fan = fixture("p2")
    assert classify_point(fan, (0, 0), (Fraction(1, 3), Fraction(1, 3))).component == 1
    assert classify_point(fan, (0, 0), (Fraction(2, 3), Fraction(2, 3))).component == 2
    assert classify_point(fan, (0, 0), (0, Fraction(1, 2))).kind == OnSingularLocus
    assert classify_point(fan, (1, 0), (Fraction(1, 2), 0)).kind == NotInSkeleton
    r = classify_point(fan, (1, 0), (0, Fraction(1, 3)))
    assert r.kind == "interior" and r.cone == (0,) and r.component == 1
    assert classify_point(fan, (1, 1), (0, 0)).cone == (0, 1)


@pytest.mark.parametrize("name", ALL)
def test_representatives_classify_to_their_component(name):
    fan = fixture(name)
    for sigma in fan.faces:
        u = tuple(sum(fan.rays[i][j] for i in sigma) for j in range(fan.rank))
        for c in stratum_components(fan, sigma):
            res = classify_point(fan, u, c.point)
            assert (res.kind, res.cone, res.component) == ("interior", sigma, c.index)


def test_random_points_classify_consistently():
    fan = fixture("p3")
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = tuple(Fraction(int(x), 97) for x in rng.integers(1, 96, size=3))
        res = classify_point(fan, (0, 0, 0), p)
        if res.kind == "interior":
            comp = stratum_components(fan, ())[res.component - 1]
            # the cocore through p only depends on the component
            assert cocore_divisor_of_point(fan, p) == cocore_divisor_of_point(fan, comp.point)


def test_cocore_divisor_rejects_singular_points():
    with pytest.raises(PointOnSingularLocus):
        cocore_divisor_of_point(fixture("p2"), (0, Fraction(1, 2)))
