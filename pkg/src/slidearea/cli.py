"""Command-line driver.

Exit codes: 0 success, 1 usage or input error, 2 a verification check failed.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import area, billiards, deform, special
from .area import Configuration
from .curves import Circle, Line, PolarCurve
from .errors import SlideAreaError
from .render import Scene, index_color, render_svg
from .scenario import load_scenario
from .solver import (SolverSettings, check_critical_piecewise, check_critical_smooth, find_critical,
                     index_histogram, make_critical, param_distance)

log = logging.getLogger("slidearea")

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2
SPECIAL_CASES = ("three-lines", "three-circles", "four-circles", "concentric-3", "concentric-4",
                 "circle-star", "midpoint")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _clean(x):
    """Round floats to 12 significant digits, recursively, for stable JSON."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return None
        v = float(f"{x:.12g}")
        return 0.0 if v == 0 else v
    return x


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2) + "\n"


def _emit(report: dict, path=None):
    text = dumps(report)
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _floats(text: str, count=None) -> np.ndarray:
    try:
        vals = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None
    if count is not None and len(vals) != count:
        raise UsageError(f"expected {count} numbers, got {len(vals)}")
    return vals


def _problem_curves(sc, vertices=None) -> tuple:
    n = vertices or sc.settings.get("vertices")
    curves = sc.curves
    if n:
        curves = tuple(curves[i % len(curves)] for i in range(int(n)))
    if len(curves) < 3:
        raise UsageError("a problem needs at least three curves (or settings.vertices)")
    return curves


def _settings(sc, args) -> SolverSettings:
    s = dict(sc.settings)
    kw = {k: s[k] for k in ("starts", "newton_tol", "max_iters", "dedup_tol", "gauge", "seed") if k in s}
    if getattr(args, "gauge", None):
        kw["gauge"] = args.gauge
    if getattr(args, "starts", None):
        kw["starts"] = args.starts
    if getattr(args, "seed", None) is not None:
        kw["seed"] = args.seed
    try:
        return SolverSettings(**kw)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def critical_record(cp) -> dict:
    return {
        "t": cp.t,
        "area": cp.area,
        "grad_norm": cp.grad_norm,
        "index": cp.index,
        "nullity": cp.morse.nullity,
        "flags": list(cp.degenerate_flags),
    }


def _hist_json(h: dict) -> dict:
    return {str(k): v for k, v in sorted(h.items())}


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_find_critical(args) -> int:
    sc = load_scenario(args.scenario)
    curves = _problem_curves(sc)
    settings = _settings(sc, args)
    cps = find_critical(curves, settings)
    hist = _hist_json(index_histogram(cps))
    report = {
        "critical_points": [critical_record(cp) for cp in cps],
        "meta": {"scenario": sc.name, "n": len(curves), "starts": settings.starts,
                 "gauge": settings.gauge, "seed": settings.seed, "count": len(cps),
                 "index_histogram": hist},
    }
    status = EXIT_OK
    if sc.expect:
        ok = True
        if "count" in sc.expect:
            ok &= len(cps) == int(sc.expect["count"])
        if "histogram" in sc.expect:
            ok &= hist == {str(k): int(v) for k, v in sc.expect["histogram"].items()}
        report["meta"]["expected"] = sc.expect
        report["meta"]["matches_expected"] = bool(ok)
        status = EXIT_OK if ok else EXIT_FAILED
    _emit(report, args.json)
    if args.svg:
        scene = Scene()
        for c in dict.fromkeys(curves):
            scene.add_curve(c, stroke="gray")
        for cp in cps:
            scene.add_critical(cp)
        Path(args.svg).write_text(render_svg(scene))
    return status


def _verdict(v) -> dict:
    return {"critical": v.critical, "branches": list(v.branches), "residuals": v.residuals}


def cmd_check(args) -> int:
    sc = load_scenario(args.scenario)
    curves = _problem_curves(sc)
    t = _floats(args.config, len(curves))
    cfg = Configuration(curves, t)
    report = {"t": t, "area": area.signed_area(cfg)}
    try:
        g = area.gradient(cfg)
        report["grad_norm"] = float(np.max(np.abs(g[cfg.free_indices()]), initial=0.0))
        report["smooth"] = _verdict(check_critical_smooth(cfg, args.tol))
    except SlideAreaError as exc:
        report["grad_norm"] = None
        report["smooth"] = {"error": str(exc)}
    report["piecewise"] = _verdict(check_critical_piecewise(cfg, args.tol))
    _emit(report, args.json)
    return EXIT_OK


def cmd_billiard(args) -> int:
    sc = load_scenario(args.scenario)
    table = sc.curves[0]
    start = _floats(args.start, 2)
    if args.map != "outer-area" and float(billiards.circular_distance(start[0], start[1], table.period or 1.0)) < 1e-12:
        raise UsageError("the two starting parameters must differ")
    orbit = billiards.iterate(table, args.map, start, args.steps, branch=args.branch)
    report = {
        "map": args.map,
        "start": start,
        "steps": args.steps,
        "closed": orbit.closed,
        "period": orbit.period,
        "winding": orbit.winding,
        "closure_residual": orbit.closure_residual,
    }
    if orbit.stopped:
        report["stopped"] = orbit.stopped
    # a start given to a few digits is only near a closed orbit; polish it
    if not orbit.closed and args.map != "outer-area" and not orbit.stopped:
        for n in range(2, args.steps + 1):
            r = billiards.closure_residual(table, args.map, start, n)
            if r < 1e-3:
                x = billiards.refine_closed(table, args.map, start, n)
                refined = billiards.iterate(table, args.map, x, n)
                if refined.closed and refined.period == n:
                    report["refined"] = {"start": x, "period": n, "winding": refined.winding,
                                         "closure_residual": refined.closure_residual,
                                         "initial_residual": r}
                break
    _emit(report, args.json)
    if args.csv:
        Path(args.csv).write_text(billiards.orbit_csv(table, orbit))
    if args.svg:
        scene = Scene().add_curve(table, stroke="gray")
        scene.add_polyline(orbit.xy, stroke="blue", width=0.6)
        for p in orbit.xy:
            scene.add_marker(p, "blue", 0.6)
        Path(args.svg).write_text(render_svg(scene))
    return EXIT_OK


def cmd_closed_orbits(args) -> int:
    sc = load_scenario(args.scenario)
    table = sc.curves[0]
    try:
        orbits = billiards.find_closed_orbits(table, args.map, args.period, args.winding, grid=args.grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    recs, ok = [], True
    for o in orbits:
        rec = {"t": o.points, "period": o.period, "winding": o.winding,
               "closure_residual": o.closure_residual}
        if args.map == "inner-area":
            v = check_critical_smooth(Configuration((table,) * args.period, o.points))
            rec["critical"] = v.critical
            ok &= v.critical
        recs.append(rec)
    _emit({"map": args.map, "period": args.period, "winding": args.winding, "count": len(orbits),
           "orbits": recs}, args.json)
    return EXIT_OK if ok else EXIT_FAILED


def _critical_config(sc, args):
    curves = _problem_curves(sc)
    if args.config:
        return Configuration(curves, _floats(args.config, len(curves)))
    cps = [cp for cp in find_critical(curves, _settings(sc, args)) if cp.morse.nullity == 0]
    if not cps:
        raise UsageError("no Morse critical configuration found; pass --config")
    return cps[0].config


def cmd_deform(args) -> int:
    sc = load_scenario(args.scenario)
    report = {"op": args.op}
    ok = True
    if args.op == "morsify":
        curves = _problem_curves(sc)
        n = len(curves)
        dirs = np.array([[1.0, 0.0] if i % 2 == 0 else [0.0, 1.0] for i in range(n)])
        rep = deform.morsify_by_translation(curves, dirs, args.rho, seed=args.seed or 0,
                                            settings=_settings(sc, args))
        report.update({"shifts": rep.shifts, "count_before": len(rep.before), "count_after": len(rep.after),
                       "min_abs_eig_before": rep.min_abs_eig_before,
                       "min_abs_eig_after": rep.min_abs_eig_after, "morse_after": rep.morse_after})
        _emit(report, args.json)
        return EXIT_OK
    cfg = _critical_config(sc, args)
    before = make_critical(cfg, cfg.free_indices())
    report["before"] = critical_record(before)
    at = args.at % cfg.n
    if args.op == "zigzag":
        new = deform.add_zigzag(cfg, at)
        after = make_critical(new, new.free_indices())
        report["after"] = critical_record(after)
        b = area.hessian(cfg).b[(at - 1) % cfg.n]
        report["b_prev"] = b
        ok = after.grad_norm < 1e-10
        if abs(b) > 1e-8 and before.morse.nullity == 0:
            ok &= after.index == before.index + 1
    elif args.op == "grow-tangent":
        r = args.radius if args.radius is not None else deform.default_radius(cfg)
        new = deform.grow_tangent_circle(cfg, [at], [r])
        after = make_critical(new, new.free_indices())
        a = area.hessian(new).a[at]
        report.update({"radius": r, "a_new": a, "after": critical_record(after)})
        ok = after.grad_norm < 1e-10 and after.index == before.index + (1 if a < 0 else 0)
    elif args.op == "grow-centered":
        two = deform.grow_centered_circle(cfg, at, args.radius)
        report["after"] = [critical_record(cp) for cp in two]
        ok = sorted(cp.index for cp in two) == [before.index, before.index + 1]
    report["verified"] = bool(ok)
    _emit(report, args.json)
    return EXIT_OK if ok else EXIT_FAILED


# ---------------------------------------------------------------------------
# Special cases
# ---------------------------------------------------------------------------

def _special_three_lines(rng):
    lines = [Line((0.0, 0.0), (1.0, 0.0)), Line((2.0, 0.0), (-1.0, 1.5)), Line((0.0, 0.5), (1.0, 2.0))]
    nf = special.three_lines_normal_form(lines)
    cps = find_critical(lines, SolverSettings(starts=64))
    err = 0.0
    for _ in range(100):
        t = rng.uniform(-3, 3, 3)
        err = max(err, abs(nf.area(t) - area.signed_area(Configuration(nf.curves, t))))
    eig = cps[0].index if cps else None
    from .morse import sylvester_index
    syl = sylvester_index(cps[0].reduced_hessian()).index if cps else None
    rep = {"critical_count": len(cps), "index": eig, "sylvester_index": syl,
           "corner_area": nf.corner_area, "critical_t": cps[0].t if cps else None,
           "normal_form_t": nf.critical_t, "normal_form_max_error": err}
    ok = len(cps) == 1 and eig == 2 and syl == 2 and err < 1e-10
    return rep, ok


def _special_three_circles(rng):
    worst_det, worst_grad = 0.0, 0.0
    for _ in range(50):
        f = special.three_circles_frame(rng.normal(size=(3, 2)), rng.normal(size=3))
        worst_grad = max(worst_grad, float(np.max(np.abs(area.gradient(f.config())))))
        d = np.linalg.det(area.hessian(f.normalized_config()).dense())
        worst_det = max(worst_det, abs(d - f.determinant()) / max(abs(d), 1e-300))
    tri = np.array([[1.0, 0.0], [-0.5, math.sqrt(3) / 2], [-0.5, -math.sqrt(3) / 2]])
    s = area.signed_area_points(tri)
    l = math.sqrt(3.0)
    r_bif = l ** 3 / (2 * s)        # m = l^3 / r = 2 s
    f = special.three_circles_frame(tri, [r_bif] * 3)
    det_bif = float(np.linalg.det(area.hessian(f.normalized_config()).dense()))
    incircle = max(float(np.linalg.norm(c)) for c in f.centers)
    rep = {"max_grad": worst_grad, "max_det_rel_error": worst_det, "bifurcation_m": f.m,
           "s": f.s, "bifurcation_det": det_bif, "max_center_offset": incircle}
    return rep, worst_grad < 1e-10 and worst_det < 1e-8 and abs(det_bif) < 1e-9 and incircle < 1e-12


def _special_four_circles(rng):
    worst_det, worst_ang = 0.0, 0.0
    for _ in range(50):
        f = special.four_circles_frame(rng.normal(size=(4, 2)), rng.normal(size=4))
        d = np.linalg.det(area.hessian(f.normalized_config()).dense())
        worst_det = max(worst_det, abs(d - f.determinant()) / max(abs(d), 1e-300))
        a = f.tangent_angles()
        worst_ang = max(worst_ang, abs(a[0] - a[2]), abs(a[0] - (math.pi - a[1])), abs(a[0] - (math.pi - a[3])))
    return {"max_det_rel_error": worst_det, "max_angle_error": worst_ang}, worst_det < 1e-8 and worst_ang < 1e-8


def _special_concentric(radii, expect_count, expect_hist):
    curves = [Circle((0.0, 0.0), r) for r in radii]
    cps = find_critical(curves, SolverSettings(gauge="fix_first_parameter"))
    hist = _hist_json(index_histogram(cps))
    recs, ok = [], len(cps) == expect_count and hist == expect_hist
    for cp in cps:
        v = special.concentric_criterion(cp.config)
        rec = {"t": cp.t, "index": cp.index, "inner_product_residual": v.residual}
        if len(radii) == 3:
            rec["orthocenter_residual"] = v.orthocenter_residual
            ok &= v.orthocenter_residual < 1e-8
        else:
            det = float(np.linalg.det(cp.reduced_hessian()))
            pred = special.concentric_four_determinant(v.signed_radii)
            rec.update({"det": det, "predicted_det": pred, "diagonal_residual": v.diagonal_residual})
            ok &= abs(det - pred) <= 1e-8 * abs(pred)
        recs.append(rec)
    return {"critical_count": len(cps), "index_histogram": hist, "points": recs}, bool(ok)


def _special_circle_star(rng):
    c = Circle((0.0, 0.0), 1.0)
    pent = special.circle_star_check(special.star_configuration(c, 5, 2 * math.pi / 5))
    star = special.circle_star_check(special.star_configuration(c, 5, 4 * math.pi / 5))
    pert = special.star_configuration(c, 5, 2 * math.pi / 5)
    pert = pert.with_t(pert.t + np.r_[0.0, 0.05, 0.0, 0.0, 0.0])
    bad = special.circle_star_check(pert)
    rep = {"pentagon": {"critical": pent.critical, "kind": pent.kind, "winding": pent.winding},
           "pentagram": {"critical": star.critical, "kind": star.kind, "winding": star.winding},
           "perturbed": {"critical": bad.critical}}
    ok = pent.critical and pent.kind == "regular" and pent.winding == 1 and star.critical and not bad.critical
    return rep, ok


def _special_midpoint(rng):
    oval = PolarCurve((0.0, 0.0), 1.0, [(2, 0.12, 0.0), (3, 0.03, 0.02)])
    cs = (oval,) * 3
    tang = special.find_tangential_critical(cs, starts=128)
    slide = [cp.t for cp in find_critical(cs, SolverSettings(starts=256))
             if special._min_separation(cs, cp.t) > 1e-3]
    d1 = max((min(param_distance(cs, a, b) for b in slide) for a in tang), default=math.inf)
    d2 = max((min(param_distance(cs, a, b) for b in tang) for a in slide), default=math.inf)
    mids = all(special.midpoint_check(Configuration(cs, x)).critical for x in tang)
    rep = {"tangential_count": len(tang), "sliding_count": len(slide), "max_distance": max(d1, d2),
           "all_midpoints": mids}
    return rep, len(tang) == len(slide) > 0 and max(d1, d2) < 1e-6 and mids


def cmd_special(args) -> int:
    rng = np.random.default_rng(args.seed or 0)
    case = args.case
    if case == "three-lines":
        rep, ok = _special_three_lines(rng)
    elif case == "three-circles":
        rep, ok = _special_three_circles(rng)
    elif case == "four-circles":
        rep, ok = _special_four_circles(rng)
    elif case == "concentric-3":
        rep, ok = _special_concentric((1.0, 2.0, 3.0), 4, {"0": 1, "1": 2, "2": 1})
    elif case == "concentric-4":
        rep, ok = _special_concentric((1.0, 2.0, 3.0, 4.0), 8, {"0": 1, "1": 3, "2": 3, "3": 1})
    elif case == "circle-star":
        rep, ok = _special_circle_star(rng)
    else:
        rep, ok = _special_midpoint(rng)
    rep = {"case": case, **rep, "passed": bool(ok)}
    _emit(rep, args.json)
    return EXIT_OK if ok else EXIT_FAILED


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slidearea", description="Critical polygons of the signed area.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def solver_flags(q):
        q.add_argument("--gauge", choices=["none", "fix-first", "fix_first_parameter"])
        q.add_argument("--starts", type=int)
        q.add_argument("--seed", type=int)

    q = sub.add_parser("find-critical", help="solve and classify")
    q.add_argument("scenario")
    solver_flags(q)
    q.add_argument("--json")
    q.add_argument("--svg")
    q.set_defaults(func=cmd_find_critical)

    q = sub.add_parser("check", help="criticality verdicts for one configuration")
    q.add_argument("scenario")
    q.add_argument("--config", required=True)
    q.add_argument("--tol", type=float, default=1e-8)
    q.add_argument("--json")
    q.set_defaults(func=cmd_check)

    q = sub.add_parser("special", help="named closed-form verification")
    q.add_argument("case", choices=SPECIAL_CASES)
    q.add_argument("--seed", type=int)
    q.add_argument("--json")
    q.set_defaults(func=cmd_special)

    q = sub.add_parser("billiard", help="iterate a billiard map")
    q.add_argument("scenario")
    q.add_argument("--map", choices=billiards.MAPS, required=True)
    q.add_argument("--start", required=True)
    q.add_argument("--steps", type=int, default=100)
    q.add_argument("--branch", choices=["left", "right"], default="right")
    q.add_argument("--csv")
    q.add_argument("--svg")
    q.add_argument("--json")
    q.set_defaults(func=cmd_billiard)

    q = sub.add_parser("closed-orbits", help="closed orbits of given period and winding")
    q.add_argument("scenario")
    q.add_argument("--map", choices=["inner-area", "perimeter"], required=True)
    q.add_argument("--period", type=int, required=True)
    q.add_argument("--winding", type=int, required=True)
    q.add_argument("--grid", type=int, default=12)
    q.add_argument("--json")
    q.set_defaults(func=cmd_closed_orbits)

    q = sub.add_parser("deform", help="zigzag, circle births and Morsification")
    q.add_argument("scenario")
    q.add_argument("--op", choices=["zigzag", "grow-tangent", "grow-centered", "morsify"], required=True)
    q.add_argument("--config")
    q.add_argument("--at", type=int, default=-1)
    q.add_argument("--radius", type=float)
    q.add_argument("--rho", type=float, default=0.1)
    solver_flags(q)
    q.add_argument("--json")
    q.set_defaults(func=cmd_deform)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, OSError, ValueError, KeyError, SlideAreaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


run = main

if __name__ == "__main__":
    sys.exit(main())
