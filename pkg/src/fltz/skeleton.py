"""Strata of the toric skeleton and their connected components.

The stratum of a cone sigma is ``sigma x sigma^perp`` with the torus factor
``sigma^perp / (sigma^perp cap M)``.  Its singular locus comes from the cones
``tau > sigma``; for a torus point it suffices to test the rays beta adjacent to
sigma, i.e. whether ``<p, beta>`` is an integer.  Torus coordinates are in units
of ``2 pi`` so every constraint is ``c . t in Z`` with integral c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

from .fan import Fan, FanError
from .lattice import dot, integer_kernel, solve_integer, solve_rational, strict_lp_feasible


class PointOnSingularLocus(FanError):
    pass


@dataclass(frozen=True)
class SkeletonStratum:
    cone: tuple
    perp_basis: tuple
    base_dim: int
    torus_dim: int

    @property
    def dimension(self) -> int:
        return self.base_dim + self.torus_dim


@dataclass(frozen=True)
class ToralArrangement:
    """Constraint covectors ``c_beta`` on the torus of a stratum."""

    stratum: SkeletonStratum
    rays: tuple
    covectors: tuple


@dataclass(frozen=True)
class SkeletonComponent:
    fan: Fan
    cone: tuple
    index: int
    representative: tuple
    signature: tuple
    chambers: tuple = field(default=(), compare=False)

    @property
    def point(self) -> tuple:
        """The representative as a covector in ``M_Q``."""
        return torus_to_point(stratum(self.fan, self.cone), self.representative)

    def to_json(self) -> dict:
        return {"id": self.index, "cone": list(self.cone),
                "representative": [str(x) for x in self.representative],
                "point": [str(x) for x in self.point],
                "signature": list(self.signature), "chambers": len(self.chambers)}


@dataclass(frozen=True)
class Classification:
    kind: str  # 'interior', 'not_in_skeleton' or 'singular'
    cone: Optional[tuple] = None
    component: Optional[int] = None

    def to_json(self) -> dict:
        return {"kind": self.kind, "cone": None if self.cone is None else list(self.cone),
                "component": self.component}


NotInSkeleton = "not_in_skeleton"
OnSingularLocus = "singular"


def stratum(fan: Fan, sigma: Sequence[int]) -> SkeletonStratum:
    s = fan.check_cone(sigma)
    basis = integer_kernel([list(fan.rays[i]) for i in s], fan.rank)
    return SkeletonStratum(s, tuple(basis), len(s), len(basis))


def strata(fan: Fan) -> list:
    return [stratum(fan, c) for c in fan.faces]


def toral_arrangement(fan: Fan, sigma: Sequence[int]) -> ToralArrangement:
    st = stratum(fan, sigma)
    betas = tuple(fan.star_rays(st.cone))
    cov = tuple(tuple(dot(b, fan.rays[beta]) for b in st.perp_basis) for beta in betas)
    return ToralArrangement(st, betas, cov)


def torus_to_point(st: SkeletonStratum, t: Sequence) -> tuple:
    n = len(st.perp_basis[0]) if st.perp_basis else 0
    if not st.perp_basis:
        return ()
    return tuple(sum(Fraction(ti) * b[j] for ti, b in zip(t, st.perp_basis)) for j in range(n))


# ---------------------------------------------------------------------------
# chamber enumeration


def _cube(d: int) -> list:
    return [(tuple(int(i == j) for j in range(d)), 0, 1) for i in range(d)]


def _slabs(cov, sig) -> list:
    return [(c, s, s + 1) for c, s in zip(cov, sig)]


def _chambers(cov: Sequence[tuple], d: int) -> list:
    """All (signature, max-slack point) for open cells of the arrangement in (0,1)^d."""
    partial = [((), None)]
    cube = _cube(d)
    for k, c in enumerate(cov):
        lo = sum(min(x, 0) for x in c)
        hi = sum(max(x, 0) for x in c) - 1
        nxt = []
        for sig, _ in partial:
            for s in range(lo, hi + 1):
                sig2 = sig + (s,)
                res = strict_lp_feasible(cube + _slabs(cov[:k + 1], sig2), d)
                if res.feasible:
                    nxt.append((sig2, res.point))
        partial = nxt
    if not cov:
        res = strict_lp_feasible(cube, d)
        partial = [((), res.point)]
    return partial


def _face_glue(cov, sig, d, i) -> bool:
    """Does the chamber ``sig`` meet the face ``t_i = 1`` in an open (d-1)-cell?"""
    keep = [j for j in range(d) if j != i]
    cons = [(tuple(int(j == k) for k in keep), 0, 1) for j in keep]
    for c, s in zip(cov, sig):
        cons.append((tuple(c[j] for j in keep), s - c[i], s + 1 - c[i]))
    if not keep:
        return all(lo < 0 < hi for _, lo, hi in cons)
    return strict_lp_feasible(cons, d - 1).feasible


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


@lru_cache(maxsize=None)
def _components(fan: Fan, sigma: tuple) -> tuple:
    arr = toral_arrangement(fan, sigma)
    d = arr.stratum.torus_dim
    cov = arr.covectors
    if d == 0:
        return (SkeletonComponent(fan, arr.stratum.cone, 1, (), (), ((),)),)
    cells = _chambers(cov, d)
    points = dict(cells)
    uf = _UnionFind(points)
    for sig in points:
        for i in range(d):
            if _face_glue(cov, sig, d, i):
                other = tuple(s - c[i] for s, c in zip(sig, cov))
                if other not in points:
                    raise FanError("chamber gluing found no matching chamber")
                uf.union(sig, other)
    groups: dict = {}
    for sig in points:
        groups.setdefault(uf.find(sig), []).append(sig)
    comps = []
    for members in groups.values():
        best = min(members, key=lambda s: points[s])
        comps.append((points[best], best, tuple(sorted(members))))
    comps.sort()
    return tuple(SkeletonComponent(fan, arr.stratum.cone, k + 1, rep, sig, members)
                 for k, (rep, sig, members) in enumerate(comps))


def stratum_components(fan: Fan, sigma: Sequence[int]) -> list:
    """Connected components of the stratum minus its singular locus."""
    return list(_components(fan, fan.check_cone(sigma)))


# ---------------------------------------------------------------------------
# classification


def _torus_coordinates(fan: Fan, st: SkeletonStratum, p: Sequence) -> tuple:
    """Reduce p (with ``<p, v>`` integral on sigma) to torus coordinates in [0,1)^d."""
    s = st.cone
    m = solve_integer([list(fan.rays[i]) for i in s], [int(dot(p, fan.rays[i])) for i in s], fan.rank) \
        if s else tuple([0] * fan.rank)
    q = [Fraction(x) - y for x, y in zip(p, m)]
    if not st.perp_basis:
        return ()
    B = [[b[j] for b in st.perp_basis] for j in range(fan.rank)]
    t = solve_rational(B, q)
    return tuple(x - math.floor(x) for x in t)


def _signature_of(cov, t) -> tuple:
    """Chamber signature of an off-arrangement point, nudged off cube faces if needed."""
    t = list(t)
    if any(x == 0 for x in t):
        # distance to the nearest constraint value, scaled to a safe step
        gap = min(min(v - math.floor(v), math.ceil(v) - v) for v in (dot(c, t) for c in cov)) \
            if cov else Fraction(1, 2)
        scale = max([sum(abs(x) for x in c) for c in cov] + [1])
        step = min(Fraction(gap) / (2 * scale), Fraction(1, 2))
        t = [x + step if x == 0 else x for x in t]
    return tuple(math.floor(dot(c, t)) for c in cov)


def classify_point(fan: Fan, u: Sequence, p: Sequence) -> Classification:
    """Locate ``(u, p)`` in the skeleton: stratum, and component when interior."""
    u = [Fraction(x) for x in u]
    p = [Fraction(x) for x in p]
    sigma = fan.minimal_cone(u)
    if sigma is None:
        return Classification(NotInSkeleton)
    if any(dot(p, fan.rays[i]).denominator != 1 for i in sigma):
        return Classification(NotInSkeleton)
    arr = toral_arrangement(fan, sigma)
    if any(dot(p, fan.rays[b]).denominator == 1 for b in arr.rays):
        return Classification(OnSingularLocus, sigma)
    st = arr.stratum
    if st.torus_dim == 0:
        return Classification("interior", sigma, 1)
    t = _torus_coordinates(fan, st, p)
    sig = _signature_of(arr.covectors, t)
    for comp in _components(fan, sigma):
        if sig in comp.chambers:
            return Classification("interior", sigma, comp.index)
    raise FanError("point classified to no chamber")


def point_in_stratum(fan: Fan, sigma: Sequence[int]) -> tuple:
    """A point in the relative interior of sigma (sum of generators)."""
    s = fan.check_cone(sigma)
    return tuple(sum(fan.rays[i][j] for i in s) for j in range(fan.rank))


def cocore_divisor_of_point(fan: Fan, p: Sequence) -> tuple:
    """Coefficients ``m_alpha = ceil(<p, alpha>)``; the divisor is ``sum(-m_alpha D_alpha)``."""
    p = [Fraction(x) for x in p]
    out = []
    for r in fan.rays:
        v = dot(p, r)
        if v.denominator == 1:
            raise PointOnSingularLocus(f"<p, {r}> = {v} is an integer")
        out.append(math.ceil(v))
    return tuple(out)
