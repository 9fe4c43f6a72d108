"""Mollified conical smoothings of support functions and their numerical checks.

``G(u) = 2 pi sum_j w_j F(u - eps |u| y_j)`` is a discrete version of the
mollifier convolution with the standard bump.  Weights are non-negative and sum
to one, so homogeneity and the gradient bound hold for the discrete G exactly
as for the integral.  Floats live only in this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, optimize, special

from .fan import Fan, FanError
from .supportfn import SupportFunction, canonical, indicator

TWO_PI = 2.0 * math.pi


class QuadratureUnderflow(FanError):
    pass


class DeltaTooSmall(FanError):
    pass


class ConstraintViolated(FanError):
    pass


class UnsupportedRank(FanError):
    pass


# ---------------------------------------------------------------------------
# mollifier


def _bump(r2: np.ndarray) -> np.ndarray:
    out = np.zeros_like(r2)
    inside = r2 < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return out


@lru_cache(maxsize=None)
def bump_constant(n: int) -> float:
    """c with ``c * exp(-1/(1-|x|^2))`` of unit integral over the n-ball."""
    sphere = 2.0 * math.pi ** (n / 2) / special.gamma(n / 2)
    radial, _ = integrate.quad(lambda r: r ** (n - 1) * math.exp(-1.0 / (1.0 - r * r)),
                               0.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    return 1.0 / (sphere * radial)


@dataclass(frozen=True)
class Mollifier:
    """Quadrature nodes ``y_j`` in the unit ball and weights ``w_j`` for the bump."""

    n: int
    c: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    raw_mass: float
    scheme: str

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def density(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        return self.c * _bump((x ** 2).sum(axis=1))


@lru_cache(maxsize=None)
def mollifier(n: int, points: int = 15, mc_samples: int = 200_000, seed: int = 0) -> Mollifier:
    """Midpoint grid of ``points^n`` nodes for n <= 3, symmetric Monte Carlo above.

    The raw quadrature mass is kept for reporting; weights are then rescaled to
    sum to exactly one.
    """
    if n < 1:
        raise UnsupportedRank("smoothing needs rank >= 1")
    c = bump_constant(n)
    if n <= 3:
        h = 2.0 / points
        g = -1.0 + h * (np.arange(points) + 0.5)
        grid = np.stack(np.meshgrid(*([g] * n), indexing="ij"), axis=-1).reshape(-1, n)
        r2 = (grid ** 2).sum(axis=1)
        keep = r2 < 1.0
        nodes = grid[keep]
        w = c * _bump(r2[keep]) * h ** n
        scheme = f"midpoint {points}^{n}"
    else:
        rng = np.random.default_rng(seed)
        half = rng.uniform(-1.0, 1.0, size=(mc_samples // 2, n))
        pts = np.concatenate([half, -half])
        r2 = (pts ** 2).sum(axis=1)
        keep = r2 < 1.0
        nodes = pts[keep]
        w = c * _bump(r2[keep]) * 2.0 ** n / len(pts)
        scheme = f"monte carlo {len(pts)} (antithetic, seed {seed})"
    raw = float(w.sum())
    w = w / raw
    nodes.setflags(write=False)
    w.setflags(write=False)
    return Mollifier(n, c, nodes, w, raw, scheme)


# ---------------------------------------------------------------------------
# conical smoother


def _quintic(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    return x ** 3 * (10.0 - 15.0 * x + 6.0 * x * x)


def _quintic_d(x: np.ndarray) -> np.ndarray:
    inside = (x > 0.0) & (x < 1.0)
    return np.where(inside, 30.0 * x ** 2 * (1.0 - x) ** 2, 0.0)


def gradient_norm_bound(F: SupportFunction) -> float:
    """``max over maximal cones of |grad F|`` (exact squared norms, then sqrt)."""
    return math.sqrt(max(sum(x * x for x in m) for m in F.pieces)) if F.pieces else 0.0


def max_ray_norm(fan: Fan) -> float:
    return math.sqrt(max(sum(x * x for x in r) for r in fan.rays))


def smoothing_constant(F: SupportFunction) -> float:
    """``C_D = 2 pi max|alpha| max |grad F|_sigma|``."""
    return TWO_PI * max_ray_norm(F.fan) * gradient_norm_bound(F)


@dataclass(frozen=True)
class ConicalSmoother:
    F: SupportFunction
    eps: float
    radius_v: float = 1.0

    def __post_init__(self):
        if not self.F.fan.is_complete:
            raise FanError("smoothing needs a complete fan")
        if self.F.fan.rank < 1:
            raise UnsupportedRank("smoothing needs rank >= 1")

    @cached_property
    def mollifier(self) -> Mollifier:
        return mollifier(self.F.fan.rank)

    @cached_property
    def C(self) -> float:
        return smoothing_constant(self.F)

    @cached_property
    def is_zero(self) -> bool:
        return not any(self.F.values) or self.C == 0.0

    @cached_property
    def _cap_coeff(self) -> float:
        fan = self.F.fan
        vals = [v / math.sqrt(sum(x * x for x in r)) for v, r in zip(self.F.values, fan.rays)]
        return TWO_PI * sum(vals) / len(vals) / self.radius_v

    # raw conical smoothing G -------------------------------------------
    def conical(self, U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``(G(u), grad G(u))`` for each row of U."""
        U = np.atleast_2d(np.asarray(U, dtype=float))
        r = np.linalg.norm(U, axis=1)
        if np.any(r < 1e-12):
            raise QuadratureUnderflow("|u| too small for the radial scaling")
        if self.is_zero:
            return np.zeros(len(U)), np.zeros_like(U)
        mol = self.mollifier
        y = mol.nodes
        w = mol.weights
        P, K, n = len(U), len(y), U.shape[1]
        Z = U[:, None, :] - (self.eps * r)[:, None, None] * y[None, :, :]
        flat = Z.reshape(-1, n)
        grads = self.F.gradient_np(flat).reshape(P, K, n)
        vals = np.einsum("pkn,pkn->pk", Z, grads)
        G = TWO_PI * vals @ w
        gy = np.einsum("pkn,kn->pk", grads, y)  # grad F(z_j) . y_j
        mean_grad = np.einsum("pkn,k->pn", grads, w)
        radial = self.eps * (gy @ w)
        dG = TWO_PI * (mean_grad - radial[:, None] * U / r[:, None])
        return G, dG

    # blended function H ------------------------------------------------
    def _blend(self, r: np.ndarray):
        s = (r / self.radius_v - 0.5) / 0.5
        return 1.0 - _quintic(s), -_quintic_d(s) / (0.5 * self.radius_v)

    def value_and_gradient(self, U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        U = np.atleast_2d(np.asarray(U, dtype=float))
        r = np.linalg.norm(U, axis=1)
        outside = r >= self.radius_v
        H = np.zeros(len(U))
        dH = np.zeros_like(U)
        if outside.any():
            H[outside], dH[outside] = self.conical(U[outside])
        inner = ~outside
        if inner.any():
            Ui, ri = U[inner], r[inner]
            beta, dbeta = self._blend(ri)
            cap = 0.5 * self._cap_coeff * ri ** 2
            dcap = self._cap_coeff * Ui
            G = np.zeros(len(Ui))
            dG = np.zeros_like(Ui)
            mid = beta < 1.0
            if mid.any():
                G[mid], dG[mid] = self.conical(Ui[mid])
            with np.errstate(invalid="ignore", divide="ignore"):
                unit = np.where(ri[:, None] > 0, Ui / np.where(ri > 0, ri, 1.0)[:, None], 0.0)
            H[inner] = (1.0 - beta) * G + beta * cap
            dH[inner] = ((1.0 - beta)[:, None] * dG + beta[:, None] * dcap
                         + ((cap - G) * dbeta)[:, None] * unit)
        return H, dH


def _point(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if np.linalg.norm(u) < 1e-12:
        raise QuadratureUnderflow("|u| too small for the radial scaling")
    return u


def smoothed_value(S: ConicalSmoother, u: Sequence[float]) -> float:
    return float(S.value_and_gradient(_point(u))[0][0])


def smoothed_gradient(S: ConicalSmoother, u: Sequence[float]) -> np.ndarray:
    return S.value_and_gradient(_point(u))[1][0]


# ---------------------------------------------------------------------------
# reports


@dataclass
class SampleReport:
    name: str
    passed: bool
    count: int
    failures: int
    worst_margin: float
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"check": self.name, "passed": bool(self.passed), "samples": int(self.count),
                "failures": int(self.failures), "worst_margin": float(self.worst_margin),
                "details": self.details}


def _report(name, margins: np.ndarray, details: dict) -> SampleReport:
    margins = np.asarray(margins, dtype=float)
    fails = int((margins < 0).sum())
    worst = float(margins.min()) if len(margins) else 0.0
    return SampleReport(name, fails == 0, len(margins), fails, worst, details)


# ---------------------------------------------------------------------------
# epsilon-star cover


def _distance_to_cone(x: np.ndarray, gens: np.ndarray) -> float:
    if len(gens) == 0:
        return float(np.linalg.norm(x))
    _, res = optimize.nnls(gens.T, x)
    return float(res)


def _cone_distances(fan: Fan, x: np.ndarray, alpha: int) -> float:
    """Smallest distance from x to a cone not containing alpha."""
    rays = fan.ray_matrix
    best = math.inf
    for c in fan.faces:
        if alpha in c:
            continue
        best = min(best, _distance_to_cone(x, rays[list(c)]))
    return best


def _in_open_star(fan: Fan, x: np.ndarray, alpha: int, tol: float = 1e-12) -> bool:
    rays = fan.ray_matrix
    for c in fan.max_cones:
        if alpha not in c:
            continue
        coeff = np.linalg.lstsq(rays[list(c)].T, x, rcond=None)[0]
        resid = np.linalg.norm(rays[list(c)].T @ coeff - x)
        k = list(c).index(alpha)
        if resid < 1e-9 and np.all(coeff >= -tol) and coeff[k] > tol:
            return True
    return False


def star_cover_membership(fan: Fan, eps: float, u: Sequence[float], alpha: int) -> bool:
    """Is u in ``U_alpha``: ``u/|u|`` in the open star and more than eps from every cone without alpha?"""
    u = np.asarray(u, dtype=float)
    x = u / np.linalg.norm(u)
    return _in_open_star(fan, x, alpha) and _cone_distances(fan, x, alpha) > eps


def sphere_samples(n: int, count: int, seed: int) -> np.ndarray:
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        th = 2.0 * math.pi * (np.arange(count) + 0.5) / count
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(count, n))
    return g / np.linalg.norm(g, axis=1)[:, None]


def division_margin(fan: Fan, x: np.ndarray) -> tuple[float, int]:
    """``max over alpha (x in st(alpha)) of min distance to cones without alpha``."""
    best, arg = -math.inf, -1
    for a in range(len(fan.rays)):
        if _in_open_star(fan, x, a):
            d = _cone_distances(fan, x, a)
            if d > best:
                best, arg = d, a
    return best, arg


def check_division(fan: Fan, eps: float, count: int = 2000, seed: int = 7) -> SampleReport:
    """Cover property (every direction in some U_alpha) and containment of closures.

    Containment in the interior of the star holds for any eps > 0 because every
    boundary point of a star lies on a cone without alpha; it is checked on the
    same samples.  Reports the largest eps for which the cover holds on the sample.
    """
    X = sphere_samples(fan.rank, count, seed)
    margins = []
    contained = True
    for x in X:
        m, a = division_margin(fan, x)
        margins.append(m - eps)
        if m > eps and a >= 0:
            contained &= _cone_distances(fan, x, a) > 0 and _in_open_star(fan, x, a)
    margins = np.array(margins)
    rep = _report("division", margins, {"eps": eps, "largest_eps": float(margins.min() + eps),
                                        "cover": bool((margins > 0).all()), "containment": bool(contained)})
    rep.passed = rep.passed and contained
    return rep


def sample_cover(fan: Fan, alpha: int, eps: float, count: int, rng: np.random.Generator,
                 radii: tuple = (2.0, 6.0)) -> np.ndarray:
    """Points of ``U_alpha`` with norm in ``radii`` (rejection sampling from the star)."""
    rays = fan.ray_matrix
    cones = [c for c in fan.max_cones if alpha in c]
    out = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > 200 * count + 1000:
            raise FanError(f"U_alpha for ray {alpha} looks empty at eps={eps}")
        c = cones[rng.integers(len(cones))]
        wts = rng.dirichlet(np.ones(len(c)))
        x = wts @ rays[list(c)]
        x = x / np.linalg.norm(x)
        if _cone_distances(fan, x, alpha) > eps:
            out.append(x * rng.uniform(*radii))
    return np.array(out)


def _samples_all_rays(fan: Fan, eps: float, count: int, seed: int, radii) -> list:
    rng = np.random.default_rng(seed)
    k = len(fan.rays)
    per = [count // k + (1 if a < count % k else 0) for a in range(k)]
    return [(a, sample_cover(fan, a, eps, per[a], rng, radii)) for a in range(k) if per[a]]


# ---------------------------------------------------------------------------
# checks


def check_gradient_bound(S: ConicalSmoother, count: int = 300, seed: int = 7,
                         bound_scale: float = 1.0, slack: float = 1e-3) -> SampleReport:
    """``|grad H . alpha + 2 pi n_alpha| <= eps C_D`` on samples of ``U_alpha`` outside V."""
    fan = S.F.fan
    radii = (1.5 * S.radius_v, 6.0 * S.radius_v)
    margins, ratios = [], []
    bound = bound_scale * S.eps * S.C + slack * S.C
    for a, U in _samples_all_rays(fan, S.eps, count, seed, radii):
        _, dH = S.value_and_gradient(U)
        alpha = np.array(fan.rays[a], dtype=float)
        n_alpha = -S.F.values[a]
        err = np.abs(dH @ alpha + TWO_PI * n_alpha)
        margins.extend(bound - err)
        if S.C > 0:
            ratios.extend(err / (S.eps * S.C))
    details = {"eps": S.eps, "C_D": S.C, "bound": bound, "bound_scale": bound_scale,
               "tightness": float(max(ratios)) if ratios else 0.0}
    return _report("gradient_bound", np.array(margins), details)


def check_homogeneity(S: ConicalSmoother, count: int = 50, scales: Sequence[float] = (1.5, 2.0, 3.7),
                      seed: int = 7) -> SampleReport:
    rng = np.random.default_rng(seed)
    n = S.F.fan.rank
    U = rng.normal(size=(count, n))
    U = U / np.linalg.norm(U, axis=1)[:, None] * rng.uniform(1.2, 4.0, size=count)[:, None] * S.radius_v
    H, _ = S.value_and_gradient(U)
    margins, worst = [], 0.0
    for lam in scales:
        Hl, _ = S.value_and_gradient(lam * U)
        resid = np.abs(Hl - lam * H)
        tol = 1e-6 * lam * np.abs(H) + 1e-9
        margins.extend(tol - resid)
        worst = max(worst, float((resid / np.maximum(lam * np.abs(H), 1e-300)).max()))
    return _report("homogeneity", np.array(margins), {"scales": list(scales), "max_relative_residual": worst})


def _node_cones(S: ConicalSmoother, u: np.ndarray) -> np.ndarray:
    r = np.linalg.norm(u)
    Z = u[None, :] - S.eps * r * S.mollifier.nodes
    return S.F.cone_index_np(Z)


def finite_difference_gradient(S: ConicalSmoother, u: np.ndarray, rel_step: float = 1e-6) -> np.ndarray:
    """Central differences of ``smoothed_value``, one-sided across node kinks.

    The discrete G is smooth except where a quadrature node crosses a wall of the
    fan; a stencil straddling such a crossing uses the side that agrees with u.
    """
    u = np.asarray(u, dtype=float)
    h = rel_step * max(np.linalg.norm(u), 1.0)
    base = _node_cones(S, u)
    g = np.zeros_like(u)
    for i in range(len(u)):
        e = np.zeros_like(u)
        e[i] = h
        plus_ok = np.array_equal(_node_cones(S, u + e), base)
        minus_ok = np.array_equal(_node_cones(S, u - e), base)
        H0 = S.value_and_gradient(np.stack([u - e, u, u + e]))[0]
        if plus_ok and minus_ok:
            g[i] = (H0[2] - H0[0]) / (2 * h)
        elif plus_ok:
            g[i] = (H0[2] - H0[1]) / h
        elif minus_ok:
            g[i] = (H0[1] - H0[0]) / h
        else:
            g[i] = (H0[2] - H0[0]) / (2 * h)
    return g


def check_finite_differences(S: ConicalSmoother, count: int = 100, seed: int = 7,
                             tol: float = 1e-4) -> SampleReport:
    rng = np.random.default_rng(seed)
    n = S.F.fan.rank
    U = rng.normal(size=(count, n))
    U = U / np.linalg.norm(U, axis=1)[:, None] * rng.uniform(1.5, 5.0, size=count)[:, None] * S.radius_v
    _, dH = S.value_and_gradient(U)
    errs = []
    for u, g in zip(U, dH):
        fd = finite_difference_gradient(S, u)
        errs.append(np.linalg.norm(fd - g) / max(np.linalg.norm(g), 1e-12 if S.is_zero else 1e-300))
        if S.is_zero:
            errs[-1] = np.linalg.norm(fd - g)
    errs = np.array(errs)
    return _report("finite_differences", tol - errs, {"max_relative_error": float(errs.max()), "tol": tol})


def check_angle_bound(F: SupportFunction, delta: float, count: int = 200, seed: int = 7,
                      radius_v: float = 1.0, tol: float = 1e-9) -> SampleReport:
    """``|g . alpha + 2 pi n_alpha + delta| <= delta/2`` for ``g = grad H_D - (delta/2pi) grad H_K``.

    Both smoothings use defect delta/4, i.e. ``eps = delta / (4 C)``.
    """
    if delta <= 0:
        raise DeltaTooSmall("delta must be positive")
    fan = F.fan
    K = canonical(fan)
    SK = ConicalSmoother(K, delta / (4 * smoothing_constant(K)), radius_v)
    CD = smoothing_constant(F)
    SD = ConicalSmoother(F, delta / (4 * CD) if CD > 0 else SK.eps, radius_v)
    eps = max(SD.eps, SK.eps)
    margins, inside = [], True
    radii = (1.5 * radius_v, 6.0 * radius_v)
    for a, U in _samples_all_rays(fan, eps, count, seed, radii):
        g = SD.value_and_gradient(U)[1] - (delta / TWO_PI) * SK.value_and_gradient(U)[1]
        alpha = np.array(fan.rays[a], dtype=float)
        ga = g @ alpha
        m_alpha = F.values[a]
        margins.extend(delta / 2 + tol - np.abs(ga - TWO_PI * m_alpha + delta))
        inside &= bool(np.all((ga > TWO_PI * (m_alpha - 1)) & (ga < TWO_PI * m_alpha)))
    rep = _report("angle_bound", np.array(margins), {"delta": delta, "eps_D": SD.eps, "eps_K": SK.eps,
                                                     "within_section_window": inside})
    return rep


def cofinal_integrand(F: SupportFunction, delta0: float, u: np.ndarray, t: float) -> float:
    """The bracketed three-integral expression scaled by ``-delta'(t) R`` with ``delta = delta0 e^{-t}``."""
    fan = F.fan
    K = canonical(fan)
    CK = smoothing_constant(K)
    CD = smoothing_constant(F)
    mol = mollifier(fan.rank)
    y, w = mol.nodes, mol.weights
    R = float(np.linalg.norm(u))
    delta = delta0 * math.exp(-t)
    ddelta = -delta
    eK = delta / (4 * CK)
    I1 = float(K.evaluate_np(u[None, :] / R - eK * y) @ w)
    I2 = 0.0
    if CD > 0:
        eD = delta / (4 * CD)
        gD = F.gradient_np(u[None, :] - R * eD * y)
        I2 = TWO_PI / (4 * CD) * float(np.einsum("kn,kn->k", gD, y) @ w)
    gK = K.gradient_np(u[None, :] - R * eK * y)
    I3 = -delta / (4 * CK) * float(np.einsum("kn,kn->k", gK, y) @ w)
    return -ddelta * R * (I1 + I2 + I3)


def cofinal_lower_bound(F: SupportFunction, delta0: float, R: float, t: float) -> float:
    """Analytic lower bound ``-delta' R [(1 - eps_K(0)) - 1/4 - delta/(8 pi)] / max|alpha|``."""
    CK = smoothing_constant(canonical(F.fan))
    delta = delta0 * math.exp(-t)
    aK0 = delta0 / (4 * CK)
    quarter = 0.25 if smoothing_constant(F) > 0 else 0.0
    return delta * R * ((1 - aK0) - quarter - delta / (8 * math.pi)) / max_ray_norm(F.fan)


def check_cofinal_positivity(F: SupportFunction, delta0: float, count: int = 200, seed: int = 7,
                             R: float = 10.0, t_max: float = 5.0) -> SampleReport:
    CK = smoothing_constant(canonical(F.fan))
    eK0 = delta0 / (4 * CK)
    if 1 - eK0 < 1 / (4 * math.pi):
        raise ConstraintViolated(f"1 - eps_K(0) = {1 - eK0:.4g} < 1/(4 pi)")
    rng = np.random.default_rng(seed)
    n = F.fan.rank
    dirs = rng.normal(size=(count, n))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    ts = rng.uniform(0.0, t_max, size=count)
    vals, bounds = [], []
    for d, t in zip(dirs, ts):
        vals.append(cofinal_integrand(F, delta0, R * d, float(t)))
        bounds.append(cofinal_lower_bound(F, delta0, R, float(t)))
    vals, bounds = np.array(vals), np.array(bounds)
    positive = vals > 0
    above = vals >= 0.5 * bounds
    margins = np.minimum(vals, vals - 0.5 * bounds)
    return _report("cofinal_positivity", margins,
                   {"delta0": delta0, "R": R, "eps_K0": eK0, "min_value": float(vals.min()),
                    "all_positive": bool(positive.all()), "above_half_bound": bool(above.all()),
                    "min_ratio_to_bound": float((vals / bounds).min()) if (bounds > 0).all() else None})


# ---------------------------------------------------------------------------
# slices along a ray


def rho(t: np.ndarray, eps: float) -> np.ndarray:
    """C^2 convex radius profile: 1 for t < 1, eps*t for t > 2/eps - 1."""
    t = np.asarray(t, dtype=float)
    T = 2.0 / eps - 1.0
    L = T - 1.0
    s = np.clip((t - 1.0) / L, 0.0, 1.0)
    mid = 1.0 + eps * L * (s ** 3 - 0.5 * s ** 4)
    return np.where(t < 1.0, 1.0, np.where(t > T, eps * t, mid))


def rho_prime(t: np.ndarray, eps: float) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    T = 2.0 / eps - 1.0
    s = np.clip((t - 1.0) / (T - 1.0), 0.0, 1.0)
    return np.where(t < 1.0, 0.0, np.where(t > T, eps, eps * (3 * s ** 2 - 2 * s ** 3)))


def slice_profile(fan: Fan, alpha: int, q: np.ndarray, ts: np.ndarray, eps: float):
    """``H(q + t alpha)`` and its exact t-derivative for the variable-radius smoothing of F_alpha."""
    F = indicator(fan, alpha)
    mol = mollifier(fan.rank)
    y, w = mol.nodes, mol.weights
    a = np.array(fan.rays[alpha], dtype=float)
    V = q[None, :] + ts[:, None] * a[None, :]
    norms = np.linalg.norm(V, axis=1)
    A = rho(norms, eps)
    dA = rho_prime(norms, eps) * (V @ a) / np.maximum(norms, 1e-300)
    Z = V[:, None, :] - A[:, None, None] * y[None, :, :]
    flat = Z.reshape(-1, fan.rank)
    grads = F.gradient_np(flat).reshape(len(ts), len(y), fan.rank)
    vals = np.einsum("pkn,pkn->pk", Z, grads)
    H = TWO_PI * vals @ w
    terms = grads @ a - dA[:, None] * np.einsum("pkn,kn->pk", grads, y)
    dH = TWO_PI * terms @ w
    return H, dH, dA


def default_slice_base(fan: Fan, alpha: int, R: float = 5.0) -> np.ndarray:
    """A point on the boundary of the star of alpha: R times a neighbouring ray."""
    nb = fan.star_rays((alpha,))
    if not nb:
        raise FanError("ray has no neighbours")
    return R * np.array(fan.rays[nb[0]], dtype=float)


def check_slice_monotonicity(fan: Fan, alpha: int, eps: float = 0.05, q: Optional[np.ndarray] = None,
                             ts: Optional[np.ndarray] = None, tol: float = 1e-6) -> SampleReport:
    if q is None:
        q = default_slice_base(fan, alpha)
    if ts is None:
        ts = np.linspace(-3.0, 3.0, 601)
    q = np.asarray(q, dtype=float)
    F = indicator(fan, alpha)
    if abs(float(F.evaluate_np(q[None, :])[0])) > 1e-12:
        raise FanError("slice base point must satisfy F_alpha(q) = 0")
    H, dH, dA = slice_profile(fan, alpha, q, ts, eps)
    fd = np.diff(H) / np.diff(ts)
    zero_H = H <= tol
    zero_d = dH <= tol
    mismatch = np.nonzero(zero_H != zero_d)[0]
    # a mismatch is tolerated only next to a transition of either indicator
    edges = set(np.nonzero(np.diff(zero_H.astype(int)))[0]) | set(np.nonzero(np.diff(zero_d.astype(int)))[0])
    near = {i for e in edges for i in (e - 1, e, e + 1, e + 2)}
    bad_zero = [int(i) for i in mismatch if int(i) not in near]
    second = np.diff(dH) / np.diff(ts)
    margins = np.concatenate([fd + tol, dH + tol])
    rep = _report("slice_monotonicity", margins, {
        "alpha": alpha, "q": [float(x) for x in q], "eps": eps, "min_fd": float(fd.min()),
        "min_derivative": float(dH.min()), "max_dA": float(np.abs(dA).max()),
        "dA_bound": eps * float(np.linalg.norm(fan.rays[alpha])),
        "zero_locus_agrees": not bad_zero, "min_second_derivative": float(second.min()),
        "convex": bool(second.min() >= -tol),
    })
    rep.passed = rep.passed and not bad_zero and float(np.abs(dA).max()) <= eps * float(np.linalg.norm(fan.rays[alpha])) + 1e-12
    return rep
