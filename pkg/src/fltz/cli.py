"""Command-line front end.  Every command builds a JSON report; text output is rendered from it."""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import smoothing as sm
from .cocore_gen import generation_witness, is_cocore, verify_generation
from .cohomology import (cohomology, euler_characteristic, exceptional_collection_check, ext_table,
                         graded_cohomology)
from .fan import (Fan, FanError, blowup_partition, fan_from_json, fixture, orlov_rank_check,
                  stop_removal_fan)
from .lattice import LatticeError
from .skeleton import classify_point, cocore_divisor_of_point, stratum_components, strata
from .supportfn import SupportFunction, lattice_points
from .svg import plot_contour, render_svg

DEFAULT_SEED = 7


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# argument helpers


def _ints(text: str) -> tuple:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _rationals(text: str) -> tuple:
    try:
        return tuple(Fraction(x) for x in text.split(",")) if text.strip() else ()
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"expected comma-separated rationals, got {text!r}") from None


def load_fan(name: Optional[str] = None, path: Optional[str] = None) -> Fan:
    if name is None and path is None:
        raise UsageError("a fan is required (--fan NAME|FILE or --file FILE)")
    if name is not None:
        try:
            return fixture(name)
        except (KeyError, ValueError):
            path = name
    p = Path(path)
    if not p.exists():
        raise UsageError(f"no fixture or file named {path!r}")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None
    return fan_from_json(data)


def _support(fan: Fan, args) -> SupportFunction:
    if getattr(args, "values", None) is not None:
        vals = _ints(args.values)
        if len(vals) != len(fan.rays):
            raise UsageError(f"expected {len(fan.rays)} values")
        return SupportFunction(fan, vals)
    if getattr(args, "divisor", None) is not None:
        a = _ints(args.divisor)
        if len(a) != len(fan.rays):
            raise UsageError(f"expected {len(fan.rays)} divisor coefficients")
        return SupportFunction.from_divisor(fan, a)
    raise UsageError("give --values or --divisor")


def _seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("FLTZ_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"FLTZ_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _cone_list(fan: Fan, text: str) -> tuple:
    cone = tuple(sorted(_ints(text)))
    if not fan.is_cone(cone):
        raise UsageError(f"{list(cone)} is not a cone of the fan")
    return cone


# ---------------------------------------------------------------------------
# commands (each returns (report, ok))


def cmd_fan(args):
    if args.action == "validate":
        try:
            fan = load_fan(args.fan, args.file)
        except FanError as exc:
            return {"valid": False, "error": str(exc), "message": f"invalid fan: {exc}"}, False
        kinds = [w for w, ok in (("smooth", fan.is_smooth), ("complete", fan.is_complete)) if ok]
        desc = " ".join(kinds) if kinds else "valid"
        return {"valid": True, "smooth": fan.is_smooth, "complete": fan.is_complete,
                "cones": len(fan.faces), "message": f"{desc}, {len(fan.faces)} cones"}, True
    fan = load_fan(args.fan, args.file)
    by_dim = {str(k): len(fan.cones_of_dim(k)) for k in range(fan.rank + 1)}
    return {**fan.to_json(), "smooth": fan.is_smooth, "complete": fan.is_complete,
            "cones_by_dim": by_dim, "message": f"rank {fan.rank}, {len(fan.rays)} rays, "
                                               f"{len(fan.max_cones)} maximal cones"}, True


def cmd_skeleton(args):
    fan = load_fan(args.fan, args.file)
    if args.action == "strata":
        out = [{"cone": list(s.cone), "base_dim": s.base_dim, "torus_dim": s.torus_dim,
                "components": len(stratum_components(fan, s.cone))} for s in strata(fan)]
        return {"strata": out, "message": f"{len(out)} strata"}, True
    if args.action == "components":
        cone = _cone_list(fan, args.cone)
        comps = stratum_components(fan, cone)
        rows = []
        for c in comps:
            row = c.to_json()
            if not cone and fan.is_complete:
                row["cocore"] = list(cocore_divisor_of_point(fan, c.point))
            rows.append(row)
        return {"cone": list(cone), "count": len(comps), "components": rows,
                "message": f"{len(comps)} components"}, True
    if args.u is None or args.p is None:
        raise UsageError("classify needs --u and --p")
    u, p = _rationals(args.u), _rationals(args.p)
    if len(u) != fan.rank or len(p) != fan.rank:
        raise UsageError(f"--u and --p need {fan.rank} coordinates")
    res = classify_point(fan, u, p).to_json()
    msg = res["kind"] if res["component"] is None else f"{res['kind']} of cone {res['cone']}, component {res['component']}"
    return {**res, "message": msg}, True


def cmd_cocore(args):
    fan = load_fan(args.fan, args.file)
    m = _ints(args.m)
    if len(m) != len(fan.rays):
        raise UsageError(f"--m needs {len(fan.rays)} coefficients")
    cert = is_cocore(fan, m).to_json()
    return {**cert, "message": "cocore" if cert["feasible"] else "not a cocore"}, True


def cmd_generate(args):
    fan = load_fan(args.fan, args.file)
    cone = _cone_list(fan, args.cone)
    comps = stratum_components(fan, cone)
    if not 1 <= args.component <= len(comps):
        raise UsageError(f"component must be in 1..{len(comps)}")
    w = generation_witness(fan, cone, comps[args.component - 1])
    rep = {**w.to_json(), "leaf_count": len(w.leaves)}
    ok = True
    msg = f"{len(w.leaves)} leaves"
    if args.verify_k:
        ok = verify_generation(w)
        rep["k_identity"] = ok
        msg += ", K-identity verified" if ok else ", K-identity FAILED"
    return {**rep, "message": msg}, ok


def cmd_blowup(args):
    fan = load_fan(args.fan, args.file)
    tau = _cone_list(fan, args.tau)
    part = blowup_partition(fan, tau).to_json()
    orlov = orlov_rank_check(fan, tau)
    msg = (f"{len(part['T'])} cones in T; Orlov count {orlov['blowup']} = "
           f"{orlov['base']} + {orlov['multiplicity']}*{orlov['centre']}: {'pass' if orlov['pass'] else 'FAIL'}")
    return {**part, "orlov": orlov, "message": msg}, orlov["pass"]


def cmd_stop_remove(args):
    fan = load_fan(args.fan, args.file)
    cone = _cone_list(fan, args.cone)
    sub, removed = stop_removal_fan(fan, cone)
    return {"fan": sub.to_json(), "origin": list(sub.origin or ()), "removed": [list(c) for c in removed],
            "message": f"removed {len(removed)} cones"}, True


def cmd_ext_table(args):
    fan = load_fan(args.fan, args.file)
    rows = [r for r in args.values.split(";") if r.strip()]
    Fs = []
    for r in rows:
        v = _ints(r)
        if len(v) != len(fan.rays):
            raise UsageError(f"each bundle needs {len(fan.rays)} values")
        Fs.append(SupportFunction(fan, v))
    if not Fs:
        raise UsageError("no bundles given")
    table = [[list(h) for h in row] for row in ext_table(Fs)]
    check = exceptional_collection_check(Fs)
    check = {**check, "violations": [list(v) for v in check["violations"]]}
    msg = f"exceptional: {check['exceptional']}, K-rank {check['k_rank']}/{check['expected_rank']}"
    return {"bundles": [list(F.values) for F in Fs], "table": table, "collection": check,
            "message": msg}, True


def cmd_cohomology(args):
    fan = load_fan(args.fan, args.file)
    F = _support(fan, args)
    h = cohomology(F)
    rep = {"values": list(F.values), "divisor": list(F.divisor), "h": list(h),
           "chi": euler_characteristic(F), "nef": F.is_nef()}
    if args.graded:
        rep["graded"] = [{"m": list(m), "h": list(b)} for m, b in sorted(graded_cohomology(F).items())]
    if rep["nef"]:
        rep["lattice_points"] = len(lattice_points(F))
    return {**rep, "message": "h = " + ", ".join(str(x) for x in h)}, True


CHECKS = ("grad", "homog", "fd", "cofinal", "slice", "angle", "division")


def cmd_smooth_check(args):
    fan = load_fan(args.fan, args.file)
    F = _support(fan, args)
    seed = _seed(args)
    names = [c.strip() for c in args.checks.split(",") if c.strip()]
    for c in names:
        if c not in CHECKS:
            raise UsageError(f"unknown check {c!r}; choose from {', '.join(CHECKS)}")
    S = sm.ConicalSmoother(F, args.eps)
    alpha = args.alpha if args.alpha is not None else min(2, len(fan.rays) - 1)
    reports = []
    for c in names:
        if c == "grad":
            r = sm.check_gradient_bound(S, args.samples, seed)
        elif c == "homog":
            r = sm.check_homogeneity(S, 50, seed=seed)
        elif c == "fd":
            r = sm.check_finite_differences(S, 100, seed)
        elif c == "cofinal":
            r = sm.check_cofinal_positivity(F, args.delta, 200, seed)
        elif c == "slice":
            r = sm.check_slice_monotonicity(fan, alpha, args.eps)
        elif c == "angle":
            r = sm.check_angle_bound(F, args.delta, 200, seed)
        else:
            r = sm.check_division(fan, args.eps, seed=seed)
        reports.append(r.to_json())
    ok = all(r["passed"] for r in reports)
    if args.svg:
        Path(args.svg).write_text(plot_contour(S), encoding="utf-8")
    msg = ", ".join(f"{r['check']} {'pass' if r['passed'] else 'FAIL'}" for r in reports)
    return {"fan_rays": [list(r) for r in fan.rays], "values": list(F.values), "eps": args.eps,
            "seed": seed, "reports": reports, "passed": ok, "message": msg}, ok


def cmd_plot(args):
    fan = load_fan(args.fan, args.file)
    kw = {"eps": args.eps, "alpha": args.alpha if args.alpha is not None else 0}
    if args.target == "arrangement":
        kw["cone"] = _cone_list(fan, args.cone)
    svg = render_svg(args.target, fan, **kw)
    if args.output:
        Path(args.output).write_text(svg, encoding="utf-8")
        return {"target": args.target, "output": args.output, "bytes": len(svg.encode()),
                "message": f"wrote {args.output}"}, True
    return {"target": args.target, "svg": svg, "message": None}, True


# ---------------------------------------------------------------------------
# parser and rendering


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit the JSON report")
    common.add_argument("--fan", help="fixture name (p1, p2, p3, pn:<n>, blp2, c3, c3bl, p1xp1) or JSON file")
    common.add_argument("--file", help="fan JSON file")

    parser = argparse.ArgumentParser(prog="fltz", description="Toric fans, skeleta, line bundles and smoothing checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fan", parents=[common], help="validate or describe a fan")
    p.add_argument("action", choices=["validate", "info"])
    p.set_defaults(func=cmd_fan)

    p = sub.add_parser("skeleton", parents=[common], help="strata, components and point classification")
    p.add_argument("action", choices=["strata", "components", "classify"])
    p.add_argument("--cone", default="", help="comma-separated ray indices (empty for the zero cone)")
    p.add_argument("--u", help="point of N_R, comma-separated rationals")
    p.add_argument("--p", help="point of M_R in units of 2 pi, comma-separated rationals")
    p.set_defaults(func=cmd_skeleton)

    p = sub.add_parser("cocore", parents=[common], help="cocore feasibility of a tropical section")
    p.add_argument("--m", required=True, help="coefficients m_alpha, one per ray")
    p.set_defaults(func=cmd_cocore)

    p = sub.add_parser("generate", parents=[common], help="generation witness for a stratum component")
    p.add_argument("--cone", default="")
    p.add_argument("--component", type=int, default=1)
    p.add_argument("--verify-k", action="store_true", help="check the K-theory identity")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("blowup", parents=[common], help="star subdivision, T-partition and Orlov count")
    p.add_argument("--tau", required=True)
    p.set_defaults(func=cmd_blowup)

    p = sub.add_parser("stop-remove", parents=[common], help="remove the cones containing a cone")
    p.add_argument("--cone", default="")
    p.set_defaults(func=cmd_stop_remove)

    p = sub.add_parser("ext-table", parents=[common], help="Ext table of line bundles")
    p.add_argument("--values", required=True, help="support-function values, bundles separated by ';'")
    p.set_defaults(func=cmd_ext_table)

    p = sub.add_parser("cohomology", parents=[common], help="cohomology of a line bundle")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--values", help="support-function values F(alpha)")
    g.add_argument("--divisor", help="divisor coefficients a_alpha = -F(alpha)")
    p.add_argument("--graded", action="store_true", help="include nonzero graded pieces")
    p.set_defaults(func=cmd_cohomology)

    p = sub.add_parser("smooth-check", parents=[common], help="numerical checks of the conical smoothing")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--values")
    g.add_argument("--divisor")
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--delta", type=float, default=0.05, help="delta for angle and cofinal checks")
    p.add_argument("--checks", default="grad,homog,cofinal,slice", help=f"subset of {','.join(CHECKS)}")
    p.add_argument("--alpha", type=int, help="ray index for the slice check")
    p.add_argument("--samples", type=int, default=300)
    p.add_argument("--seed", type=int, help="overrides FLTZ_SEED (default 7)")
    p.add_argument("--svg", help="write a plot of the smoothed function here")
    p.set_defaults(func=cmd_smooth_check)

    p = sub.add_parser("plot", parents=[common], help="SVG drawings of rank-2 data")
    p.add_argument("target", choices=["fan", "cover", "slice", "arrangement"])
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--alpha", type=int)
    p.add_argument("--cone", default="")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_plot)
    return parser


def _scalar(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return json.dumps(v) if isinstance(v, (list, dict)) else str(v)


def render_text(report: dict) -> str:
    """Human-readable view of a report: headline, then one line per field."""
    if report.get("svg") is not None:
        return report["svg"]
    lines = [report["message"]] if report.get("message") else []
    for k, v in report.items():
        if k == "message":
            continue
        if k == "reports":
            for r in v:
                lines.append(f"  {r['check']:<20} {'pass' if r['passed'] else 'FAIL'}  "
                             f"samples={r['samples']} failures={r['failures']} worst_margin={r['worst_margin']:.6g}")
            continue
        lines.append(f"  {k}: {_scalar(v)}")
    return "\n".join(lines) + "\n"


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report, ok = args.func(args)
    except UsageError as exc:
        print(f"fltz: error: {exc}", file=sys.stderr)
        return 2
    except (FanError, LatticeError, sm.UnsupportedRank) as exc:
        print(f"fltz: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    text = json.dumps(report, indent=2, sort_keys=True)
    sys.stdout.write(text + "\n" if args.json else render_text(json.loads(text)))
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())
