import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fltz.fan import FanMismatch, fixture, star_quotient
from fltz.supportfn import (LinearFunction, NotTransverse, SupportFunction, UnboundedPolytope, canonical,
                            indicator, is_transverse, lattice_points, lift_from_orbit, linear_equivalence,
                            normal_form, pullback, restrict_to_orbit, transverse_normalize, zero)

from oracles import box_lattice_points

COMPLETE = ["p1", "p2", "p3", "blp2", "p1xp1"]


def values_for(name):
    k = len(fixture(name).rays)
    return st.lists(st.integers(-3, 3), min_size=k, max_size=k).map(tuple)


def test_divisor_sign_convention():
    fan = fixture("p2")
    F = SupportFunction.from_divisor(fan, (1, 0, 1))
    assert F.values == (-1, 0, -1)
    assert F.divisor == (1, 0, 1)
    assert indicator(fan, 0).divisor == (-1, 0, 0)
    assert canonical(fan).values == (1, 1, 1)


def test_pieces_and_evaluation():
    fan = fixture("p2")
    F = SupportFunction(fan, (0, 0, -1))  # O(1)
    assert set(F.pieces) == {(0, 0), (1, 0), (0, 1)}
    assert F.evaluate((-1, -1)) == -1
    assert F.evaluate((Fraction(1, 2), 3)) == 0
    assert F.is_nef()
    assert not SupportFunction(fan, (0, 0, 1)).is_nef()


@pytest.mark.parametrize("name", COMPLETE)
def test_float_layer_agrees_with_exact(name):
    fan = fixture(name)
    rng = np.random.default_rng(1)
    F = SupportFunction(fan, tuple(int(x) for x in rng.integers(-3, 4, size=len(fan.rays))))
    for _ in range(30):
        u = rng.integers(-7, 8, size=fan.rank)
        exact = F.evaluate(tuple(int(x) for x in u))
        assert F.evaluate_np(u.astype(float))[0] == pytest.approx(float(exact), abs=1e-12)


def test_arithmetic_and_mismatch():
    fan = fixture("p2")
    F = SupportFunction(fan, (1, 2, 3))
    G = SupportFunction(fan, (0, -1, 1))
    assert (F + G).values == (1, 1, 4)
    assert (F - G).values == (1, 3, 2)
    assert (-F).values == (-1, -2, -3)
    assert F.scale(2).values == (2, 4, 6)
    with pytest.raises(FanMismatch):
        F + zero(fixture("blp2"))


def test_linear_equivalence_and_normal_form():
    fan = fixture("p2")
    F = SupportFunction(fan, (0, 0, -2))
    G = F + LinearFunction((3, -1)).on(fan)
    assert linear_equivalence(G, F) == LinearFunction((3, -1))
    assert normal_form(G) == normal_form(F)
    assert linear_equivalence(indicator(fan, 0), zero(fan)) is None


@pytest.mark.parametrize("name", COMPLETE)
def test_lattice_points_match_box_enumeration(name):
    fan = fixture(name)
    for vals in itertools.islice(itertools.product(range(-2, 2), repeat=len(fan.rays)), 0, None, 7):
        F = SupportFunction(fan, vals)
        assert lattice_points(F) == box_lattice_points(fan.rays, vals, 9)


def test_lattice_points_projective_plane():
    fan = fixture("p2")
    # O(d) has (d+1)(d+2)/2 sections
    for d in range(5):
        assert len(lattice_points(SupportFunction(fan, (0, 0, -d)))) == (d + 1) * (d + 2) // 2


def test_unbounded_polytope():
    with pytest.raises(UnboundedPolytope):
        lattice_points(zero(fixture("c3")))


def test_transverse_normalize_example():
    fan = fixture("p2")
    F, m = transverse_normalize(indicator(fan, 0), (0,))
    assert m == LinearFunction((1, 0))
    assert F.values == (0, 0, 1)
    assert is_transverse(F, (0,))


def test_restrict_requires_transverse():
    fan = fixture("p2")
    with pytest.raises(NotTransverse):
        restrict_to_orbit(indicator(fan, 0), (0,))


@pytest.mark.parametrize("name", COMPLETE)
def test_lift_then_restrict_is_identity(name):
    fan = fixture(name)
    rng = np.random.default_rng(5)
    for sigma in fan.faces:
        if not sigma:
            continue
        q, _ = star_quotient(fan, sigma)
        G = SupportFunction(q, tuple(int(x) for x in rng.integers(-3, 4, size=len(q.rays))))
        assert restrict_to_orbit(lift_from_orbit(fan, sigma, G), sigma) == G


@settings(max_examples=60, deadline=None)
@given(values_for("blp2"), st.tuples(st.integers(-3, 3), st.integers(-3, 3)))
def test_transverse_normalize_differs_by_linear(vals, cone_pick):
    fan = fixture("blp2")
    F = SupportFunction(fan, vals)
    sigma = fan.faces[sum(cone_pick) % len(fan.faces)]
    H, m = transverse_normalize(F, sigma)
    assert is_transverse(H, sigma)
    assert H + m.on(fan) == F


def test_pullback_along_projection():
    p1xp1, p1 = fixture("p1xp1"), fixture("p1")
    F = SupportFunction(p1, (0, -2))
    G = pullback([[1, 0]], p1xp1, F)
    assert G.values == (0, 0, -2, 0)
