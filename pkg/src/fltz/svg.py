"""Plain SVG 1.1 drawings of rank-2 fans, star covers, arrangements and slices."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .fan import Fan
from .skeleton import _components, toral_arrangement
from .smoothing import (ConicalSmoother, UnsupportedRank, default_slice_base, slice_profile,
                        star_cover_membership)

SIZE = 400
PALETTE = ("#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7")


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _doc(body: list, title: str) -> str:
    head = (f'<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" '
            f'viewBox="0 0 {SIZE} {SIZE}">\n<title>{title}</title>\n'
            f'<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="white"/>\n')
    return head + "\n".join(body) + "\n</svg>\n"


def _to_canvas(x: float, y: float, scale: float) -> tuple:
    return SIZE / 2 + scale * x, SIZE / 2 - scale * y


def _require_rank2(fan: Fan):
    if fan.rank != 2:
        raise UnsupportedRank(f"drawing needs a rank-2 fan, got rank {fan.rank}")


def _polygon(points, fill, opacity=0.35) -> str:
    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in points)
    return f'<polygon points="{pts}" fill="{fill}" fill-opacity="{opacity}" stroke="none"/>'


def _ray_lines(fan: Fan, scale: float, reach: float) -> list:
    out = []
    for k, r in enumerate(fan.rays):
        v = np.array(r, dtype=float)
        v = v / np.linalg.norm(v) * reach
        x, y = _to_canvas(v[0], v[1], scale)
        out.append(f'<line x1="{SIZE / 2}" y1="{SIZE / 2}" x2="{_fmt(x)}" y2="{_fmt(y)}" '
                   f'stroke="black" stroke-width="2"/>')
        lx, ly = _to_canvas(1.08 * v[0], 1.08 * v[1], scale)
        out.append(f'<text x="{_fmt(lx)}" y="{_fmt(ly)}" font-size="12" text-anchor="middle">'
                   f'{k}: ({r[0]},{r[1]})</text>')
    return out


def plot_fan(fan: Fan) -> str:
    _require_rank2(fan)
    scale, reach = 150.0, 1.0
    body = []
    for k, c in enumerate(fan.max_cones):
        if len(c) < 2:
            continue
        pts = [(SIZE / 2, SIZE / 2)]
        a, b = (np.array(fan.rays[i], dtype=float) for i in c)
        a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
        for s in np.linspace(0.0, 1.0, 24):
            v = (1 - s) * a + s * b
            v = v / np.linalg.norm(v) * reach
            pts.append(_to_canvas(v[0], v[1], scale))
        body.append(_polygon(pts, PALETTE[k % len(PALETTE)]))
    return _doc(body + _ray_lines(fan, scale, reach), "fan")


def plot_cover(fan: Fan, eps: float, steps: int = 720) -> str:
    """Angular sectors of each ``U_alpha``, one ring per ray."""
    _require_rank2(fan)
    scale = 150.0
    body = []
    k = len(fan.rays)
    for a in range(k):
        r0 = 0.35 + 0.6 * a / k
        r1 = 0.35 + 0.6 * (a + 1) / k
        th = 2 * math.pi * (np.arange(steps) + 0.5) / steps
        inside = [star_cover_membership(fan, eps, (math.cos(t), math.sin(t)), a) for t in th]
        i = 0
        while i < steps:
            if not inside[i]:
                i += 1
                continue
            j = i
            while j + 1 < steps and inside[j + 1]:
                j += 1
            t0, t1 = 2 * math.pi * i / steps, 2 * math.pi * (j + 1) / steps
            arc = np.linspace(t0, t1, max(2, j - i + 2))
            pts = [_to_canvas(r1 * math.cos(t), r1 * math.sin(t), scale) for t in arc]
            pts += [_to_canvas(r0 * math.cos(t), r0 * math.sin(t), scale) for t in arc[::-1]]
            body.append(_polygon(pts, PALETTE[a % len(PALETTE)], 0.6))
            i = j + 1
    body += _ray_lines(fan, scale, 1.0)
    body.append(f'<text x="8" y="{SIZE - 8}" font-size="12">eps = {eps}</text>')
    return _doc(body, "star cover")


def plot_arrangement(fan: Fan, sigma: Sequence[int]) -> str:
    """Chambers of the torus arrangement of a stratum with 2-dimensional torus, coloured by component."""
    arr = toral_arrangement(fan, sigma)
    if arr.stratum.torus_dim != 2:
        raise UnsupportedRank("arrangement drawing needs a 2-dimensional torus")
    comps = _components(fan, arr.stratum.cone)
    colour = {}
    for c in comps:
        for sig in c.chambers:
            colour[sig] = PALETTE[(c.index - 1) % len(PALETTE)]
    n = 160
    cell = SIZE / n
    body = []
    for i in range(n):
        column = []
        for j in range(n):
            t = ((i + 0.5) / n, (j + 0.5) / n)
            column.append(colour.get(tuple(math.floor(c[0] * t[0] + c[1] * t[1]) for c in arr.covectors)))
        j = 0
        while j < n:
            k = j
            while k + 1 < n and column[k + 1] == column[j]:
                k += 1
            if column[j] is not None:
                body.append(f'<rect x="{_fmt(i * cell)}" y="{_fmt(SIZE - (k + 1) * cell)}" width="{_fmt(cell)}" '
                            f'height="{_fmt((k - j + 1) * cell)}" fill="{column[j]}" fill-opacity="0.5"/>')
            j = k + 1
    for c in arr.covectors:
        lo = sum(min(x, 0) for x in c)
        hi = sum(max(x, 0) for x in c)
        for v in range(lo, hi + 1):
            seg = _clip_line(c, v)
            if seg:
                (x0, y0), (x1, y1) = seg
                body.append(f'<line x1="{_fmt(x0 * SIZE)}" y1="{_fmt(SIZE - y0 * SIZE)}" '
                            f'x2="{_fmt(x1 * SIZE)}" y2="{_fmt(SIZE - y1 * SIZE)}" '
                            f'stroke="black" stroke-width="1.5"/>')
    return _doc(body, f"arrangement of cone {list(arr.stratum.cone)}")


def _clip_line(c, v):
    """Segment of ``c . t = v`` inside the unit square, or None."""
    a, b = c
    pts = []
    if b:
        for x in (0.0, 1.0):
            y = (v - a * x) / b
            if 0 <= y <= 1:
                pts.append((x, y))
    if a:
        for y in (0.0, 1.0):
            x = (v - b * y) / a
            if 0 <= x <= 1:
                pts.append((x, y))
    pts = sorted(set(pts))
    if len(pts) < 2 or pts[0] == pts[-1]:
        return None
    return pts[0], pts[-1]


def _polyline(xs, ys, box, colour) -> str:
    x0, x1, y0, y1 = box
    margin = 40
    w = SIZE - 2 * margin
    pts = []
    for x, y in zip(xs, ys):
        px = margin + w * (x - x0) / (x1 - x0)
        py = SIZE - margin - w * (y - y0) / (y1 - y0 if y1 > y0 else 1.0)
        pts.append(f"{_fmt(px)},{_fmt(py)}")
    return f'<polyline points="{" ".join(pts)}" fill="none" stroke="{colour}" stroke-width="2"/>'


def plot_slice(fan: Fan, alpha: int, eps: float = 0.05) -> str:
    """Graph of ``d/dt H(q + t alpha)`` (solid) and ``H`` (faint) along the default slice."""
    q = default_slice_base(fan, alpha)
    ts = np.linspace(-3.0, 3.0, 601)
    H, dH, _ = slice_profile(fan, alpha, q, ts, eps)
    ymax = max(float(dH.max()), 1e-9) * 1.1
    box = (ts[0], ts[-1], min(0.0, float(dH.min())), ymax)
    body = [_polyline(ts, dH, box, PALETTE[0]),
            _polyline(ts, H * ymax / max(float(H.max()), 1e-9), box, "#bbbbbb"),
            f'<text x="8" y="16" font-size="12">d/dt H along q + t alpha, alpha = {alpha}</text>']
    return _doc(body, "slice")


def plot_contour(S: ConicalSmoother, extent: float = 4.0, n: int = 80, levels: int = 12) -> str:
    """Filled level bands of the smoothed function on a square grid."""
    _require_rank2(S.F.fan)
    xs = np.linspace(-extent, extent, n)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    U = np.stack([X.ravel(), Y.ravel()], axis=1)
    H, _ = S.value_and_gradient(U)
    lo, hi = float(H.min()), float(H.max())
    span = hi - lo if hi > lo else 1.0
    band = np.minimum(((H - lo) / span * levels).astype(int), levels - 1)
    cell = SIZE / n
    body = []
    for k, (i, j) in enumerate(np.ndindex(n, n)):
        g = int(255 - 200 * band[k] / max(levels - 1, 1))
        body.append(f'<rect x="{_fmt(i * cell)}" y="{_fmt(SIZE - (j + 1) * cell)}" width="{_fmt(cell)}" '
                    f'height="{_fmt(cell)}" fill="rgb({g},{g},255)"/>')
    return _doc(body, "smoothed function")


def render_svg(target: str, fan: Fan, **kw) -> str:
    if target == "fan":
        return plot_fan(fan)
    if target == "cover":
        return plot_cover(fan, kw.get("eps", 0.1))
    if target == "arrangement":
        return plot_arrangement(fan, kw.get("cone", ()))
    if target == "slice":
        if fan.rank != 2:
            raise UnsupportedRank("slice drawing needs a rank-2 fan")
        return plot_slice(fan, kw.get("alpha", 0), kw.get("eps", 0.05))
    raise ValueError(f"unknown plot target {target!r}")

