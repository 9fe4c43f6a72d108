"""Line bundle cohomology on toric varieties and K-theory classes.

The weight-m part of ``H^p(O(F))`` is the reduced cohomology
``H~^{p-1}(K_m; Q)``, where ``K_m`` is the complex of cones all of whose rays
lie in ``N_m = {alpha : <m, alpha> < F(alpha)}``.  The homology of each
``K_m`` depends only on ``N_m`` and is cached per ray-subset bitmask.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .fan import Fan, FanError, FanMismatch, IncompleteFan
from .lattice import rank
from .supportfn import (NotTransverse, SupportFunction, canonical, indicator, is_transverse,
                        normal_form, restrict_to_orbit, transverse_normalize, vertex_box)


# ---------------------------------------------------------------------------
# subcomplexes of the fan


@lru_cache(maxsize=None)
def _face_masks(fan: Fan) -> tuple:
    return tuple(sum(1 << i for i in c) for c in fan.faces)


@lru_cache(maxsize=None)
def reduced_betti(fan: Fan, mask: int) -> tuple:
    """``dim H~_{i}(K_mask; Q)`` for i = -1 .. rank-1."""
    n = fan.rank
    faces = [c for c, fm in zip(fan.faces, _face_masks(fan)) if fm & ~mask == 0]
    by_dim: dict = {}
    for c in faces:
        by_dim.setdefault(len(c) - 1, []).append(c)
    index = {d: {c: k for k, c in enumerate(cs)} for d, cs in by_dim.items()}

    def boundary_rank(d):
        # boundary map C_d -> C_{d-1}
        if d not in by_dim or d - 1 not in by_dim:
            return 0
        rows = []
        for c in by_dim[d]:
            row = [0] * len(by_dim[d - 1])
            for j in range(len(c)):
                row[index[d - 1][c[:j] + c[j + 1:]]] = (-1) ** j
            rows.append(row)
        return rank(rows)

    ranks = {d: boundary_rank(d) for d in range(0, n + 1)}
    out = []
    for i in range(-1, n):
        f = len(by_dim.get(i, ()))
        out.append(f - ranks.get(i, 0) - ranks.get(i + 1, 0))
    return tuple(out)


@lru_cache(maxsize=None)
def reduced_euler_term(fan: Fan, mask: int) -> int:
    """``sum_p (-1)^p dim H~^{p-1}(K_mask)`` from face counts alone."""
    return sum((-1) ** bin(fm).count("1") for fm in _face_masks(fan) if fm & ~mask == 0)


# ---------------------------------------------------------------------------
# weight sweep


def _masks(F: SupportFunction, pts: np.ndarray) -> np.ndarray:
    R = np.array(F.fan.rays, dtype=np.int64)
    neg = (pts @ R.T) < np.array(F.values, dtype=np.int64)
    if len(F.fan.rays) < 62:
        return neg.astype(np.int64) @ (np.int64(1) << np.arange(len(F.fan.rays), dtype=np.int64))
    weights = np.array([1 << i for i in range(len(F.fan.rays))], dtype=object)
    return neg.astype(object) @ weights


def _box_points(lo, hi) -> np.ndarray:
    axes = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(lo, hi)]
    grid = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=1)


def _shell(lo, hi) -> np.ndarray:
    pts = _box_points([a - 1 for a in lo], [b + 1 for b in hi])
    inner = np.all((pts >= np.array(lo)) & (pts <= np.array(hi)), axis=1)
    return pts[~inner]


def weight_histogram(F: SupportFunction) -> dict:
    """Map ``N_m`` bitmask -> number of weights m realising it, over the contributing region.

    The start box covers every vertex of the arrangements ``<m, alpha> = F(alpha)``
    and ``<m, alpha> = F(alpha) - 1`` (this contains the section polytopes of F and
    the reflection of those of ``F_K - F``), inflated by 2; it then grows until two
    consecutive shells contribute nothing.
    """
    fan = F.fan
    if not fan.is_complete:
        raise IncompleteFan("cohomology needs a complete fan")
    n = fan.rank
    if n == 0:
        return {0: 1}
    lo, hi = vertex_box(F, (0, -1))
    lo = [a - 2 for a in lo]
    hi = [b + 2 for b in hi]
    hist: dict = {}

    def add(pts):
        nonzero = False
        if len(pts) == 0:
            return False
        masks, counts = np.unique(_masks(F, pts), return_counts=True)
        for mk, ct in zip(masks, counts):
            mk = int(mk)
            if any(reduced_betti(fan, mk)):
                hist[mk] = hist.get(mk, 0) + int(ct)
                nonzero = True
        return nonzero

    add(_box_points(lo, hi))
    quiet = 0
    while quiet < 2:
        shell = _shell(lo, hi)
        lo = [a - 1 for a in lo]
        hi = [b + 1 for b in hi]
        quiet = 0 if add(shell) else quiet + 1
    return hist


def cohomology(F: SupportFunction) -> tuple:
    """Dimensions ``(h^0, ..., h^n)`` of ``H^p(X_Sigma, O(F))`` over Q."""
    fan = F.fan
    n = fan.rank
    h = [0] * (n + 1)
    for mask, count in weight_histogram(F).items():
        b = reduced_betti(fan, mask)
        for p in range(n + 1):
            h[p] += count * b[p]
    return tuple(h)


def graded_cohomology(F: SupportFunction) -> dict:
    """Nonzero graded pieces: weight m -> (h^0_m, ..., h^n_m)."""
    fan = F.fan
    n = fan.rank
    if n == 0:
        return {(): (1,)}
    lo, hi = vertex_box(F, (0, -1))
    pts = _box_points([a - 2 for a in lo], [b + 2 for b in hi])
    out = {}
    for m, mk in zip(pts, _masks(F, pts)):
        b = reduced_betti(fan, int(mk))
        if any(b):
            out[tuple(int(x) for x in m)] = b
    return out


@lru_cache(maxsize=None)
def _chi_normalized(fan: Fan, values: tuple) -> int:
    F = SupportFunction(fan, values)
    if fan.rank == 0:
        return 1
    lo, hi = vertex_box(F, (0, -1))
    pts = _box_points([a - 1 for a in lo], [b + 1 for b in hi])
    masks, counts = np.unique(_masks(F, pts), return_counts=True)
    return int(sum(int(c) * reduced_euler_term(fan, int(mk)) for mk, c in zip(masks, counts)))


def euler_characteristic(F: SupportFunction) -> int:
    """``chi(O(F))``, cached on the linear-equivalence class."""
    if not F.fan.is_complete:
        raise IncompleteFan("cohomology needs a complete fan")
    return _chi_normalized(F.fan, normal_form(F).values)


def serre_dual(F: SupportFunction) -> SupportFunction:
    return canonical(F.fan) - F


def hom_rank(F1: SupportFunction, F2: SupportFunction, p: int) -> int:
    """``dim Ext^p(O(F1), O(F2)) = h^p(O(F2 - F1))``."""
    h = cohomology(F2 - F1)
    return h[p] if 0 <= p < len(h) else 0


def ext_table(Fs: Sequence[SupportFunction]) -> list:
    """Entry [i][j] is the tuple ``h^*(O(F_j - F_i))``."""
    return [[cohomology(Fj - Fi) for Fj in Fs] for Fi in Fs]


# ---------------------------------------------------------------------------
# K-theory classes


def _candidates(fan: Fan):
    n = fan.rank
    yield from itertools.product(range(0, -n - 1, -1), repeat=len(fan.rays))


@lru_cache(maxsize=None)
def spanning_family(fan: Fan) -> tuple:
    """Support functions whose classes span ``K_0 (x) Q``, chosen greedily.

    A candidate is kept when it raises the rank of the Gram matrix
    ``chi(O(G_j - G_i))``.  Candidates have values in ``{0, -1, ..., -n}``.
    """
    if not fan.is_complete:
        raise IncompleteFan("K-classes need a complete fan")
    target = len(fan.max_cones)
    chosen: list = []
    keys: set = set()
    for vals in _candidates(fan):
        G = SupportFunction(fan, vals)
        key = normal_form(G).values
        if key in keys:
            continue
        trial = chosen + [G]
        gram = [[euler_characteristic(b - a) for b in trial] for a in trial]
        if rank(gram) == len(trial):
            chosen.append(G)
            keys.add(key)
            if len(chosen) == target:
                return tuple(chosen)
    raise FanError(f"spanning family stalled at rank {len(chosen)} < {target}")


@dataclass(frozen=True)
class KClass:
    """Class in ``K_0 (x) Q`` recorded by its Euler pairings with a spanning family."""

    fan: Fan
    vector: tuple

    def _check(self, other):
        if self.fan != other.fan:
            raise FanMismatch("K-classes on different fans")

    def __add__(self, other):
        self._check(other)
        return KClass(self.fan, tuple(a + b for a, b in zip(self.vector, other.vector)))

    def __sub__(self, other):
        self._check(other)
        return KClass(self.fan, tuple(a - b for a, b in zip(self.vector, other.vector)))

    def scale(self, k: int):
        return KClass(self.fan, tuple(k * a for a in self.vector))

    def is_zero(self) -> bool:
        return not any(self.vector)


def zero_class(fan: Fan) -> KClass:
    return KClass(fan, tuple([0] * len(spanning_family(fan))))


def k_class(F: SupportFunction) -> KClass:
    """Entries ``chi(O(F + G_j))``."""
    fam = spanning_family(F.fan)
    return KClass(F.fan, tuple(euler_characteristic(F + G) for G in fam))


def k_class_orbit_pushforward(sigma: Sequence[int], F: SupportFunction) -> KClass:
    """Class of ``O(F)`` restricted to the orbit closure of sigma, pushed forward."""
    fan = F.fan
    s = fan.check_cone(sigma)
    fam = spanning_family(fan)
    vec = []
    for G in fam:
        H, _ = transverse_normalize(F + G, s)
        vec.append(euler_characteristic(restrict_to_orbit(H, s)))
    return KClass(fan, tuple(vec))


def k_rank(classes: Sequence[KClass]) -> int:
    return rank([list(c.vector) for c in classes]) if classes else 0


def verify_exact_triangle(F: SupportFunction, alpha: int) -> bool:
    """``[O(F + F_alpha)] - [O(F)] + [O(F)|_{D_alpha}] = 0`` for F vanishing on alpha."""
    if not is_transverse(F, (alpha,)):
        raise NotTransverse(f"F does not vanish on ray {alpha}")
    total = k_class(F + indicator(F.fan, alpha)) - k_class(F) + k_class_orbit_pushforward((alpha,), F)
    return total.is_zero()


def exceptional_collection_check(Fs: Sequence[SupportFunction]) -> dict:
    """Check an ordered collection of line bundles for exceptionality and fullness.

    Ordering convention: ``Ext^*(E_i, E_j) = 0`` whenever i > j.
    """
    fan = Fs[0].fan
    n = fan.rank
    self_ext = all(cohomology(F - F) == (1,) + (0,) * n for F in Fs)
    bad = []
    for i, j in itertools.product(range(len(Fs)), repeat=2):
        if i > j and any(cohomology(Fs[j] - Fs[i])):
            bad.append((i, j))
    kr = k_rank([k_class(F) for F in Fs])
    target = len(fan.max_cones)
    return {"exceptional": self_ext and not bad, "violations": bad,
            "k_rank": kr, "expected_rank": target, "full": kr == target}
