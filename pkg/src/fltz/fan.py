"""Simplicial fans: validation, stars, quotients, subdivisions and blowups.

A cone of a fan is a sorted tuple of ray indices.  The zero cone is ``()``.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from .lattice import (NotARay, QuotientMap, content, dot, is_unimodular_set, linprog_max,
                      matvec, primitive, quotient_lattice, rank, rational_nullspace,
                      row_reduce, strict_lp_feasible)


class FanError(ValueError):
    pass


class FanConditionViolated(FanError):
    pass


class NotStronglyConvex(FanError):
    pass


class NotSimplicial(FanError):
    pass


class ConeNotInFan(FanError):
    pass


class AlphaOutsideSupport(FanError):
    pass


class FanMismatch(FanError):
    pass


class NotAFanMap(FanError):
    pass


class IncompleteFan(FanError):
    pass


ConeIdx = tuple


@dataclass(frozen=True)
class Cone:
    """A simplicial cone given by linearly independent generators."""

    generators: tuple

    @cached_property
    def dim(self) -> int:
        return len(self.generators)

    @cached_property
    def _dual(self):
        G = [list(g) for g in self.generators]
        if not G:
            return [], []
        n = len(G[0])
        # left inverse H with H G^T = I, rows are the facet normals within span(G)
        GGt = [[Fraction(dot(a, b)) for b in G] for a in G]
        R, piv = row_reduce([row + [int(i == j) for j in range(len(G))] for i, row in enumerate(GGt)])
        inv = [row[len(G):] for row in R]
        H = [tuple(sum(inv[i][k] * G[k][j] for k in range(len(G))) for j in range(n)) for i in range(len(G))]
        E = rational_nullspace(G, n)
        return H, E

    @property
    def facet_normals(self) -> list:
        return self._dual[0]

    @property
    def equations(self) -> list:
        return self._dual[1]

    def coordinates(self, u: Sequence) -> Optional[tuple]:
        """Coefficients of u in the generators, or None if u is off the span."""
        if not self.generators:
            return () if not any(u) else None
        H, E = self._dual
        if any(dot(e, u) != 0 for e in E):
            return None
        return tuple(dot(h, u) for h in H)

    def contains(self, u: Sequence) -> bool:
        c = self.coordinates(u)
        return c is not None and all(x >= 0 for x in c)

    def relint_contains(self, u: Sequence) -> bool:
        c = self.coordinates(u)
        return c is not None and all(x > 0 for x in c)


@dataclass(frozen=True)
class Fan:
    """A simplicial fan in ``N_R = R^rank``.

    ``origin`` optionally records, for each ray, the index of the parent ray it
    came from (for stars, quotients and subfans).  It is not part of equality.
    """

    rank: int
    rays: tuple
    max_cones: tuple
    origin: Optional[tuple] = field(default=None, compare=False)

    @cached_property
    def faces(self) -> tuple:
        out = set()
        for c in self.max_cones:
            for k in range(len(c) + 1):
                out.update(itertools.combinations(c, k))
        return tuple(sorted(out, key=lambda c: (len(c), c)))

    @cached_property
    def _face_set(self) -> frozenset:
        return frozenset(self.faces)

    def is_cone(self, cone: Iterable[int]) -> bool:
        return tuple(sorted(cone)) in self._face_set

    def check_cone(self, cone: Iterable[int]) -> tuple:
        c = tuple(sorted(cone))
        if c not in self._face_set:
            raise ConeNotInFan(f"{c} is not a cone of the fan")
        return c

    def cone(self, idx: Iterable[int]) -> Cone:
        return Cone(tuple(self.rays[i] for i in sorted(idx)))

    @cached_property
    def _max_cone_objs(self) -> tuple:
        return tuple(self.cone(c) for c in self.max_cones)

    def cones_of_dim(self, k: int) -> list:
        return [c for c in self.faces if len(c) == k]

    def ray_index(self, v: Sequence[int]) -> Optional[int]:
        v = tuple(v)
        try:
            return self.rays.index(v)
        except ValueError:
            return None

    def minimal_cone(self, u: Sequence) -> Optional[tuple]:
        """The cone whose relative interior contains u (None outside the support)."""
        for c, obj in zip(self.max_cones, self._max_cone_objs):
            coords = obj.coordinates(u)
            if coords is not None and all(x >= 0 for x in coords):
                return tuple(i for i, x in zip(c, coords) if x > 0)
        return None

    def max_cone_containing(self, u: Sequence) -> Optional[int]:
        for k, obj in enumerate(self._max_cone_objs):
            if obj.contains(u):
                return k
        return None

    def star_cones(self, sigma: Iterable[int]) -> list:
        s = set(sigma)
        return [c for c in self.faces if s.issubset(c)]

    def star_rays(self, sigma: Iterable[int]) -> list:
        s = set(sigma)
        out = set()
        for c in self.max_cones:
            if s.issubset(c):
                out.update(c)
        return sorted(out - s)

    def link_max_cones(self, sigma: Iterable[int]) -> list:
        s = set(sigma)
        return [c for c in self.max_cones if s.issubset(c)]

    @cached_property
    def is_complete(self) -> bool:
        n = self.rank
        if not self.max_cones or any(len(c) != n for c in self.max_cones):
            return False
        if n == 0:
            return True
        count: dict = {}
        for c in self.max_cones:
            for f in itertools.combinations(c, n - 1):
                count[f] = count.get(f, 0) + 1
        if any(v != 2 for v in count.values()):
            return False
        # adjacency graph of maximal cones must be connected
        seen = {self.max_cones[0]}
        stack = [self.max_cones[0]]
        by_facet: dict = {}
        for c in self.max_cones:
            for f in itertools.combinations(c, n - 1):
                by_facet.setdefault(f, []).append(c)
        while stack:
            c = stack.pop()
            for f in itertools.combinations(c, n - 1):
                for d in by_facet[f]:
                    if d not in seen:
                        seen.add(d)
                        stack.append(d)
        return len(seen) == len(self.max_cones)

    @cached_property
    def is_smooth(self) -> bool:
        return all(is_unimodular_set([self.rays[i] for i in c]) for c in self.max_cones)

    def to_json(self) -> dict:
        return {"rank": self.rank, "rays": [list(r) for r in self.rays],
                "max_cones": [list(c) for c in self.max_cones]}

    @cached_property
    def ray_matrix(self) -> np.ndarray:
        return np.array(self.rays, dtype=float).reshape(len(self.rays), self.rank)


# ---------------------------------------------------------------------------
# construction and validation


def _check_pair(rays, c1, c2) -> bool:
    shared = sorted(set(c1) & set(c2))
    only1 = [rays[i] for i in c1 if i not in shared]
    only2 = [rays[i] for i in c2 if i not in shared]
    n = len(rays[0]) if rays else 0
    # separating functional h = B y vanishing on the shared face
    B = rational_nullspace([list(rays[i]) for i in shared], n) if shared else \
        [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    d = len(B)
    if d == 0:
        return not only1 and not only2
    cons = []
    for v in only1:
        cons.append((tuple(dot(b, v) for b in B), 0, None))
    for v in only2:
        cons.append((tuple(dot(b, v) for b in B), None, 0))
    return strict_lp_feasible(cons, d).feasible


def _strongly_convex(gens) -> bool:
    # no c >= 0 with sum c = 1 and sum c_i v_i = 0
    k = len(gens)
    n = len(gens[0])
    A_eq = [[g[j] for g in gens] for j in range(n)] + [[1] * k]
    b_eq = [0] * n + [1]
    status, _, _ = linprog_max([0] * k, [], [], A_eq, b_eq, free=False)
    return status != 'optimal'


def build_fan(rank_: int, rays: Sequence[Sequence[int]], max_cones: Sequence[Sequence[int]],
              validate: bool = True) -> Fan:
    """Validate and build a simplicial fan.

    Non-primitive rays are normalised with a warning.  Rays not used by any
    listed cone become one-dimensional maximal cones.
    """
    prays = []
    for r in rays:
        r = tuple(int(x) for x in r)
        if len(r) != rank_:
            raise FanConditionViolated(f"ray {r} does not have length {rank_}")
        try:
            p = primitive(r)
        except NotARay as e:
            raise FanConditionViolated(str(e)) from e
        if p != r:
            warnings.warn(f"ray {r} is not primitive; using {p}")
        prays.append(p)
    if len(set(prays)) != len(prays):
        raise FanConditionViolated("repeated ray")
    cones = [tuple(sorted(set(int(i) for i in c))) for c in max_cones]
    for c in cones:
        if any(i < 0 or i >= len(prays) for i in c):
            raise FanConditionViolated(f"cone {c} references a missing ray")
    used = set(i for c in cones for i in c)
    cones += [(i,) for i in range(len(prays)) if i not in used]
    cones = sorted(set(cones))
    if validate:
        for c in cones:
            gens = [prays[i] for i in c]
            if gens and rank([list(g) for g in gens]) < len(gens):
                if not _strongly_convex(gens):
                    raise NotStronglyConvex(f"cone {c} contains a line")
                raise NotSimplicial(f"cone {c} has dependent generators")
        for a, b in itertools.combinations(cones, 2):
            if set(a) <= set(b) or set(b) <= set(a):
                raise FanConditionViolated(f"cone {a} is a face of {b}")
            if not _check_pair(prays, a, b):
                raise FanConditionViolated(f"cones {a} and {b} do not meet in a common face")
    return Fan(rank_, tuple(prays), tuple(sorted(cones)))


def fan_from_json(data: dict) -> Fan:
    return build_fan(int(data["rank"]), data["rays"], data["max_cones"])


def _maximal(cones: Iterable[tuple]) -> list:
    cs = sorted(set(cones), key=len, reverse=True)
    out: list = []
    for c in cs:
        if not any(set(c) < set(d) for d in out):
            out.append(c)
    return sorted(out)


def subfan(fan: Fan, cones: Iterable[tuple]) -> Fan:
    """The fan generated by the given cones, on the rays they use."""
    mx = _maximal(cones)
    used = sorted(set(i for c in mx for i in c))
    new = {old: k for k, old in enumerate(used)}
    parent = fan.origin
    origin = tuple(parent[i] if parent else i for i in used)
    return Fan(fan.rank, tuple(fan.rays[i] for i in used),
               tuple(sorted(tuple(new[i] for i in c) for c in mx)), origin)


# ---------------------------------------------------------------------------
# stars and quotients


def star(fan: Fan, sigma: Iterable[int]) -> Fan:
    """The closed star ``str(sigma)``: all faces of cones containing sigma."""
    s = fan.check_cone(sigma)
    return subfan(fan, fan.link_max_cones(s))


def star_quotient(fan: Fan, sigma: Iterable[int]) -> tuple[Fan, QuotientMap]:
    """The fan ``str(sigma)/sigma`` in ``N / span(sigma)``.

    The quotient fan's ``origin`` gives the index (in ``fan``) of the ray whose
    image each quotient ray is.
    """
    s = fan.check_cone(sigma)
    q = quotient_lattice(fan.rank, [fan.rays[i] for i in s])
    if q.torsion:
        raise FanError(f"cone {s} does not span a saturated sublattice")
    others = fan.star_rays(s)
    new = {b: k for k, b in enumerate(others)}
    qrays = tuple(primitive(q.apply(fan.rays[b])) for b in others)
    cones = sorted(tuple(sorted(new[b] for b in c if b not in s)) for c in fan.link_max_cones(s))
    return Fan(q.rank, qrays, tuple(cones), tuple(others)), q


def quotient_scale(fan: Fan, qmap: QuotientMap, beta: int) -> int:
    """Index c with ``P(beta) = c * (primitive image)``."""
    return content(qmap.apply(fan.rays[beta]))


def stop_removal_fan(fan: Fan, sigma: Iterable[int]) -> tuple[Fan, list]:
    """Subfan of cones not containing sigma, and the removed cones."""
    s = set(fan.check_cone(sigma))
    keep = [c for c in fan.faces if not s.issubset(c)]
    removed = [c for c in fan.faces if s.issubset(c)]
    if not keep:
        return Fan(fan.rank, (), (), ()), removed
    return subfan(fan, keep), removed


# ---------------------------------------------------------------------------
# fan maps


def check_fan_map(f: Sequence[Sequence[int]], fan1: Fan, fan2: Fan) -> None:
    """Raise NotAFanMap unless each cone of fan1 maps into a cone of fan2."""
    f = [list(row) for row in f]
    if len(f) != fan2.rank or any(len(row) != fan1.rank for row in f):
        raise FanMismatch("matrix shape does not match the fans")
    for c in fan1.max_cones:
        imgs = [matvec(f, fan1.rays[i]) for i in c]
        if not any(all(obj.contains(v) for v in imgs) for obj in fan2._max_cone_objs):
            raise NotAFanMap(f"cone {c} maps into no cone of the target")


# ---------------------------------------------------------------------------
# subdivisions and blowups


def star_subdivision(fan: Fan, alpha: Sequence[int]) -> Fan:
    """Star subdivision of fan along the primitive vector alpha."""
    a = primitive(alpha)
    if len(a) != fan.rank:
        raise FanMismatch("alpha has the wrong length")
    if fan.ray_index(a) is not None:
        return fan
    if fan.minimal_cone(a) is None:
        raise AlphaOutsideSupport(f"{a} is not in the support of the fan")
    k = len(fan.rays)
    cones = []
    for c, obj in zip(fan.max_cones, fan._max_cone_objs):
        coords = obj.coordinates(a)
        if coords is None or any(x < 0 for x in coords):
            cones.append(c)
            continue
        tau = [i for i, x in zip(c, coords) if x > 0]
        for rho in tau:
            cones.append(tuple(sorted([i for i in c if i != rho] + [k])))
    return Fan(fan.rank, fan.rays + (a,), tuple(sorted(cones)))


@dataclass
class BlowupPartition:
    """Cones of ``Bl_tau`` split into kept, lifted and the remainder T."""

    blowup: Fan
    alpha: int
    tau: tuple
    kept: list
    lifted: dict
    T: list
    fiber_codim: dict

    def to_json(self) -> dict:
        return {"fan": self.blowup.to_json(), "alpha": self.alpha, "tau": list(self.tau),
                "kept": [list(c) for c in self.kept],
                "lifted": [[list(c), list(o)] for c, o in self.lifted.items()],
                "T": [{"cone": list(c), "fiber_codim": self.fiber_codim[c]} for c in self.T]}


def fiber_codimension(fan: Fan, tau: Sequence[int], blowup: Fan, sigma: Sequence[int], alpha: int) -> int:
    """``|sigma/alpha| - rank`` of the images of sigma's other rays in ``N / span(tau)``."""
    q = quotient_lattice(fan.rank, [fan.rays[i] for i in tau])
    rest = [q.apply(blowup.rays[i]) for i in sigma if i != alpha]
    r = rank([list(v) for v in rest]) if rest and q.rank else 0
    return len(rest) - r


def blowup_partition(fan: Fan, tau: Iterable[int]) -> BlowupPartition:
    t = fan.check_cone(tau)
    if len(t) < 2:
        raise FanError("blowup centre must have dimension at least 2")
    alpha = tuple(sum(fan.rays[i][j] for i in t) for j in range(fan.rank))
    bl = star_subdivision(fan, alpha)
    a = bl.ray_index(primitive(alpha))
    kept, T = [], []
    lifted: dict = {}
    for c in bl.faces:
        if a not in c:
            kept.append(c)
            continue
        rest = [i for i in c if i != a]
        big = tuple(sorted(set(rest) | set(t)))
        # smallest cone of fan containing c has the same dimension as c
        if len(big) == len(c) and fan.is_cone(big):
            lifted[c] = big
        else:
            T.append(c)
    codim = {c: fiber_codimension(fan, t, bl, c, a) for c in T}
    return BlowupPartition(bl, a, t, kept, lifted, T, codim)


def orlov_rank_check(fan: Fan, tau: Iterable[int]) -> dict:
    """Compare maximal-cone counts of the blowup with the expected formula."""
    t = fan.check_cone(tau)
    bl = blowup_partition(fan, t).blowup
    q, _ = star_quotient(fan, t)
    lhs = len(bl.max_cones)
    rhs = len(fan.max_cones) + (len(t) - 1) * len(q.max_cones)
    return {"blowup": lhs, "base": len(fan.max_cones), "centre": len(q.max_cones),
            "multiplicity": len(t) - 1, "expected": rhs, "pass": lhs == rhs}


# ---------------------------------------------------------------------------
# fixtures


def projective_space(n: int) -> Fan:
    rays = [tuple(int(i == j) for j in range(n)) for i in range(n)] + [tuple([-1] * n)]
    cones = list(itertools.combinations(range(n + 1), n))
    return Fan(n, tuple(rays), tuple(sorted(cones)))


def point_fan() -> Fan:
    return Fan(0, (), ((),))


def p1xp1() -> Fan:
    return Fan(2, ((1, 0), (0, 1), (-1, 0), (0, -1)), ((0, 1), (0, 3), (1, 2), (2, 3)))


def blown_up_p2() -> Fan:
    return Fan(2, ((1, 0), (0, 1), (1, 1), (-1, -1)), ((0, 2), (0, 3), (1, 2), (1, 3)))


def affine_space(n: int) -> Fan:
    rays = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    return Fan(n, rays, (tuple(range(n)),))


def blown_up_c3() -> Fan:
    return star_subdivision(affine_space(3), (1, 1, 1))


FIXTURES = {
    "p1": lambda: projective_space(1),
    "p2": lambda: projective_space(2),
    "p3": lambda: projective_space(3),
    "blp2": blown_up_p2,
    "c3": lambda: affine_space(3),
    "c3bl": blown_up_c3,
    "p1xp1": p1xp1,
}


def fixture(name: str) -> Fan:
    if name.startswith("pn:"):
        n = int(name[3:])
        if n < 1:
            raise ValueError("pn:<n> needs n >= 1")
        return projective_space(n)
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(sorted(FIXTURES))}, pn:<n>")
    return FIXTURES[name]()
