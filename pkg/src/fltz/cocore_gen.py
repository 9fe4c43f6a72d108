"""Cocore criterion and recursive generation witnesses.

A tropical section with coefficients ``m`` (divisor ``sum(-m_alpha D_alpha)``,
support function values ``F(alpha) = m_alpha``) is a cocore exactly when the open
polytope ``{p : m_alpha - 1 < <p, alpha> < m_alpha}`` is nonempty.

A generation witness for a component of the stratum of sigma is a signed list
of ``2^|sigma|`` line bundles obtained by recursing into ``str(alpha)/alpha`` for
the lowest ray alpha of sigma and pairing each lifted leaf ``F`` with
``F + F_alpha``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .cohomology import (KClass, exceptional_collection_check, k_class, k_class_orbit_pushforward,
                         zero_class)
from .fan import Fan, FanError, projective_space, star_quotient
from .lattice import solve_rational, strict_lp_feasible
from .skeleton import (SkeletonComponent, _components, _signature_of, cocore_divisor_of_point,
                       stratum, toral_arrangement, torus_to_point)
from .supportfn import SupportFunction, indicator, lift_from_orbit


class ComponentMismatch(FanError):
    pass


@dataclass(frozen=True)
class CocoreCertificate:
    coefficients: tuple
    feasible: bool
    point: Optional[tuple]
    slack: Fraction

    def to_json(self) -> dict:
        return {"m": list(self.coefficients), "feasible": self.feasible,
                "point": None if self.point is None else [str(x) for x in self.point],
                "slack": str(self.slack)}


def is_cocore(fan: Fan, m: Sequence[int]) -> CocoreCertificate:
    if len(m) != len(fan.rays):
        raise FanError("one coefficient per ray is required")
    cons = [(r, mi - 1, mi) for r, mi in zip(fan.rays, m)]
    res = strict_lp_feasible(cons, fan.rank)
    return CocoreCertificate(tuple(m), res.feasible, res.point if res.feasible else None, res.slack)


def cocore_support_function(fan: Fan, p: Sequence) -> SupportFunction:
    """Support function of the cocore section through p (values ``m_alpha``)."""
    return SupportFunction(fan, cocore_divisor_of_point(fan, p))


# ---------------------------------------------------------------------------
# generation witnesses


@dataclass
class GenerationWitness:
    fan: Fan
    cone: tuple
    component: SkeletonComponent
    point: tuple
    tree: dict
    leaves: list
    target: SupportFunction

    def signed_class(self) -> KClass:
        total = zero_class(self.fan)
        for s, F in self.leaves:
            total = total + k_class(F).scale(s)
        return total

    def to_json(self) -> dict:
        return {"cone": list(self.cone), "component": self.component.index,
                "point": [str(x) for x in self.point], "tree": self.tree,
                "leaves": [{"sign": s, "values": list(F.values)} for s, F in self.leaves],
                "target": list(self.target.values)}


def _clean_quotient_point(qfan: Fan, qcone: tuple, pbar: tuple) -> bool:
    arr = toral_arrangement(qfan, qcone)
    return all(sum(Fraction(a) * b for a, b in zip(pbar, qfan.rays[beta])).denominator != 1
               for beta in arr.rays)


def _dithered(fan: Fan, sigma: tuple, comp: SkeletonComponent, k: int) -> tuple:
    """Representative moved by ``2^-k`` towards the chamber's interior, same chamber."""
    arr = toral_arrangement(fan, sigma)
    t = comp.representative
    d = len(t)
    step = Fraction(1, 2 ** k)
    cand = tuple(x + step * Fraction(i + 1, d + 1) for i, x in enumerate(t))
    cand = tuple(x - (x.numerator // x.denominator) for x in cand)
    if _signature_of(arr.covectors, cand) != comp.signature:
        return None
    return cand


def _witness(fan: Fan, sigma: tuple, p: tuple):
    """Return (tree, leaves, target) for the component of sigma containing p."""
    if not sigma:
        F = cocore_support_function(fan, p)
        return {"cocore": list(F.values)}, [(1, F)], F
    alpha = sigma[0]
    qfan, qmap = star_quotient(fan, (alpha,))
    where = {b: k for k, b in enumerate(qfan.origin)}
    qcone = tuple(sorted(where[b] for b in sigma[1:]))
    pbar = qmap.dual(p)
    if not _clean_quotient_point(qfan, qcone, pbar):
        raise ComponentMismatch("projected point lies on the quotient singular locus")
    sub_tree, sub_leaves, sub_target = _witness(qfan, qcone, pbar)
    Fa = indicator(fan, alpha)
    leaves = []
    pairs = []
    for s, G in sub_leaves:
        L = lift_from_orbit(fan, (alpha,), G)
        leaves.append((s, L))
        leaves.append((-s, L + Fa))
        pairs.append([s, list(L.values)])
    tree = {"ray": alpha, "quotient_cone": list(qcone), "quotient": sub_tree, "pairs": pairs}
    return tree, leaves, lift_from_orbit(fan, (alpha,), sub_target)


def generation_witness(fan: Fan, sigma: Sequence[int], component: SkeletonComponent) -> GenerationWitness:
    s = fan.check_cone(sigma)
    if component.cone != s:
        raise ComponentMismatch("component belongs to another stratum")
    p = component.point
    try:
        tree, leaves, target = _witness(fan, s, p)
    except ComponentMismatch:
        for k in range(1, 40):
            t = _dithered(fan, s, component, k)
            if t is None:
                continue
            p = torus_to_point(stratum(fan, s), t)
            try:
                tree, leaves, target = _witness(fan, s, p)
                break
            except ComponentMismatch:
                continue
        else:
            raise
    return GenerationWitness(fan, s, component, p, tree, leaves, target)


def verify_generation(w: GenerationWitness) -> bool:
    return w.signed_class() == k_class_orbit_pushforward(w.cone, w.target)


def projective_line_bundle(n: int, d: int) -> SupportFunction:
    """``O(d)`` on projective space as ``d`` times the last toric divisor."""
    fan = projective_space(n)
    return SupportFunction(fan, tuple([0] * n + [-d]))


def express_in_basis(c: KClass, basis: Sequence[KClass]) -> Optional[tuple]:
    A = [[b.vector[i] for b in basis] for i in range(len(c.vector))]
    x = solve_rational(A, list(c.vector))
    return x


def beilinson_witness(n: int) -> dict:
    """Witness classes of every ℙⁿ stratum component in the basis O(0), ..., O(-n)."""
    fan = projective_space(n)
    bundles = [projective_line_bundle(n, -j) for j in range(n + 1)]
    basis = [k_class(F) for F in bundles]
    strata_out = []
    for sigma in fan.faces:
        for comp in _components(fan, sigma):
            w = generation_witness(fan, sigma, comp)
            coeffs = express_in_basis(w.signed_class(), basis)
            if coeffs is None or any(x.denominator != 1 for x in coeffs):
                raise FanError("witness class is not an integral combination of O(-j)")
            strata_out.append({
                "cone": list(sigma), "codim": len(sigma), "component": comp.index,
                "leaves": len(w.leaves), "verified": verify_generation(w),
                "coefficients": {f"O({-j})": int(x) for j, x in enumerate(coeffs) if x},
            })
    coll = list(reversed(bundles))  # O(-n), ..., O(0)
    return {"n": n, "strata": strata_out, "collection": [f"O({-j})" for j in range(n, -1, -1)],
            "check": exceptional_collection_check(coll)}
