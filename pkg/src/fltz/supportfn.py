"""Piecewise-linear support functions on simplicial fans.

A support function is stored by its values on the rays.  The associated
torus-invariant divisor is ``D_F = sum(-F(alpha) D_alpha)`` and the sections of
``O(F)`` are the lattice points of ``{m : <m, alpha> >= F(alpha)}``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .fan import Fan, FanError, FanMismatch, check_fan_map, quotient_scale, star_quotient
from .lattice import dot, matvec, rank, solve_integer, solve_rational


class NonIntegralPiece(FanError):
    pass


class NotTransverse(FanError):
    pass


class UnboundedPolytope(FanError):
    pass


@dataclass(frozen=True)
class SupportFunction:
    fan: Fan
    values: tuple

    def __post_init__(self):
        if len(self.values) != len(self.fan.rays):
            raise FanMismatch("one value per ray is required")
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))

    # arithmetic ------------------------------------------------------------
    def _check(self, other: "SupportFunction"):
        if self.fan != other.fan:
            raise FanMismatch("support functions live on different fans")

    def __add__(self, other: "SupportFunction") -> "SupportFunction":
        self._check(other)
        return SupportFunction(self.fan, tuple(a + b for a, b in zip(self.values, other.values)))

    def __sub__(self, other: "SupportFunction") -> "SupportFunction":
        self._check(other)
        return SupportFunction(self.fan, tuple(a - b for a, b in zip(self.values, other.values)))

    def __neg__(self) -> "SupportFunction":
        return SupportFunction(self.fan, tuple(-a for a in self.values))

    def scale(self, k: int) -> "SupportFunction":
        return SupportFunction(self.fan, tuple(k * a for a in self.values))

    # divisors --------------------------------------------------------------
    @property
    def divisor(self) -> tuple:
        """Coefficients ``a_alpha = -F(alpha)`` of ``D_F``."""
        return tuple(-v for v in self.values)

    @classmethod
    def from_divisor(cls, fan: Fan, coeffs: Sequence[int]) -> "SupportFunction":
        return cls(fan, tuple(-int(a) for a in coeffs))

    # linear pieces ---------------------------------------------------------
    @cached_property
    def pieces(self) -> tuple:
        """Integral linear piece ``m_sigma`` on each maximal cone."""
        n = self.fan.rank
        out = []
        for c in self.fan.max_cones:
            G = [list(self.fan.rays[i]) for i in c]
            b = [self.values[i] for i in c]
            m = solve_integer(G, b, n) if G else tuple([0] * n)
            if m is None:
                raise NonIntegralPiece(f"no integral linear piece on cone {c}")
            out.append(tuple(m))
        return tuple(out)

    def evaluate(self, u: Sequence) -> Fraction:
        k = self.fan.max_cone_containing(u)
        if k is None:
            raise FanError(f"{tuple(u)} is outside the support")
        return Fraction(dot(self.pieces[k], u))

    @cached_property
    def _np_data(self):
        fan = self.fan
        if not fan.is_complete:
            raise FanError("float evaluation needs a complete fan")
        inv = np.array([np.linalg.inv(np.array([fan.rays[i] for i in c], dtype=float))
                        for c in fan.max_cones])
        grads = np.array(self.pieces, dtype=float)
        return inv, grads

    def cone_index_np(self, U: np.ndarray) -> np.ndarray:
        """Index of a maximal cone containing each row of U (float)."""
        inv, _ = self._np_data
        coords = np.einsum("pn,kni->pki", np.atleast_2d(U), inv)
        return np.argmax(coords.min(axis=2), axis=1)

    def evaluate_np(self, U: np.ndarray) -> np.ndarray:
        U = np.atleast_2d(U)
        _, grads = self._np_data
        k = self.cone_index_np(U)
        return np.einsum("pn,pn->p", U, grads[k])

    def gradient_np(self, U: np.ndarray) -> np.ndarray:
        _, grads = self._np_data
        return grads[self.cone_index_np(np.atleast_2d(U))]

    def is_nef(self) -> bool:
        """Concavity: every linear piece lies in the section polytope."""
        rays = self.fan.rays
        return all(dot(m, r) >= v for m in self.pieces for r, v in zip(rays, self.values))

    def to_json(self) -> dict:
        return {"values": list(self.values)}


@dataclass(frozen=True)
class LinearFunction:
    m: tuple

    def on(self, fan: Fan) -> SupportFunction:
        return SupportFunction(fan, tuple(dot(self.m, r) for r in fan.rays))


def zero(fan: Fan) -> SupportFunction:
    return SupportFunction(fan, tuple([0] * len(fan.rays)))


def indicator(fan: Fan, alpha: int) -> SupportFunction:
    """``F_alpha``: value 1 on ray alpha and 0 elsewhere, so ``D = -D_alpha``."""
    return SupportFunction(fan, tuple(int(i == alpha) for i in range(len(fan.rays))))


def canonical(fan: Fan) -> SupportFunction:
    """Support function of ``K = -sum D_alpha``: value +1 on every ray."""
    return SupportFunction(fan, tuple([1] * len(fan.rays)))


def linear_equivalence(F1: SupportFunction, F2: SupportFunction) -> Optional[LinearFunction]:
    """Integral m with ``F1 - F2 = <m, .>`` or None."""
    F1._check(F2)
    d = [a - b for a, b in zip(F1.values, F2.values)]
    m = solve_integer([list(r) for r in F1.fan.rays], d, F1.fan.rank)
    return None if m is None else LinearFunction(tuple(m))


def normal_form(F: SupportFunction) -> SupportFunction:
    """Representative of the class of F vanishing on the first maximal cone."""
    if not F.fan.max_cones:
        return F
    return F - LinearFunction(F.pieces[0]).on(F.fan)


def vertex_box(F: SupportFunction, offsets: Sequence[int] = (0, -1)) -> tuple:
    """Box containing every vertex of the arrangement ``<m, alpha> = F(alpha) + o``."""
    fan = F.fan
    n = fan.rank
    lo = [0] * n
    hi = [0] * n
    first = True
    for idx in itertools.combinations(range(len(fan.rays)), n):
        G = [list(fan.rays[i]) for i in idx]
        if rank(G) < n:
            continue
        for offs in itertools.product(offsets, repeat=n):
            x = solve_rational(G, [F.values[i] + o for i, o in zip(idx, offs)])
            for j in range(n):
                f, c = math.floor(x[j]), math.ceil(x[j])
                if first:
                    lo[j], hi[j] = f, c
                else:
                    lo[j], hi[j] = min(lo[j], f), max(hi[j], c)
            first = False
    return tuple(lo), tuple(hi)


def lattice_points(F: SupportFunction) -> list:
    """Lattice points of ``P_F = {m : <m, alpha> >= F(alpha)}`` in lexicographic order."""
    fan = F.fan
    if not fan.is_complete:
        raise UnboundedPolytope("section polytope of an incomplete fan is unbounded")
    n = fan.rank
    if n == 0:
        return [()]
    lo, hi = vertex_box(F, (0,))
    grid = np.array(list(itertools.product(*[range(a, b + 1) for a, b in zip(lo, hi)])), dtype=np.int64)
    R = np.array(fan.rays, dtype=np.int64)
    ok = np.all(grid @ R.T >= np.array(F.values, dtype=np.int64), axis=1)
    return [tuple(int(x) for x in row) for row in grid[ok]]


# ---------------------------------------------------------------------------
# pullback, normalisation and orbit restriction


def pullback(f: Sequence[Sequence[int]], fan1: Fan, F: SupportFunction) -> SupportFunction:
    check_fan_map(f, fan1, F.fan)
    vals = []
    for r in fan1.rays:
        v = F.evaluate(matvec([list(row) for row in f], r))
        if v.denominator != 1:
            raise NonIntegralPiece("pullback value is not integral")
        vals.append(int(v))
    return SupportFunction(fan1, tuple(vals))


def transverse_normalize(F: SupportFunction, sigma: Sequence[int]) -> tuple[SupportFunction, LinearFunction]:
    """Subtract an integral extension of F's piece on sigma so it vanishes there."""
    fan = F.fan
    s = fan.check_cone(sigma)
    m = solve_integer([list(fan.rays[i]) for i in s], [F.values[i] for i in s], fan.rank) \
        if s else tuple([0] * fan.rank)
    if m is None:
        raise NonIntegralPiece(f"no integral extension of the piece on {s}")
    lf = LinearFunction(tuple(m))
    return F - lf.on(fan), lf


def is_transverse(F: SupportFunction, sigma: Sequence[int]) -> bool:
    return all(F.values[i] == 0 for i in sigma)


def restrict_to_orbit(F: SupportFunction, sigma: Sequence[int]) -> SupportFunction:
    """The induced support function on ``str(sigma)/sigma``; F must vanish on sigma."""
    fan = F.fan
    s = fan.check_cone(sigma)
    if not is_transverse(F, s):
        raise NotTransverse(f"support function does not vanish on {s}")
    q, qmap = star_quotient(fan, s)
    vals = []
    for b in q.origin:
        c = quotient_scale(fan, qmap, b)
        if F.values[b] % c:
            raise NonIntegralPiece("orbit restriction is not integral")
        vals.append(F.values[b] // c)
    return SupportFunction(q, tuple(vals))


def lift_from_orbit(fan: Fan, sigma: Sequence[int], G: SupportFunction) -> SupportFunction:
    """Extend G on ``str(sigma)/sigma`` to fan: zero on sigma and off the star."""
    s = fan.check_cone(sigma)
    q, qmap = star_quotient(fan, s)
    if q != G.fan:
        raise FanMismatch("G does not live on the quotient fan")
    vals = [0] * len(fan.rays)
    for k, b in enumerate(q.origin):
        vals[b] = G.values[k] * quotient_scale(fan, qmap, b)
    return SupportFunction(fan, tuple(vals))
