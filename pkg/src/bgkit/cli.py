"""Command-line entry point.

Every subcommand reads inputs (space/action JSON files or a preset), runs
one toolkit operation, prints the JSON report on stdout and a one-line
human summary on stderr.  Exit codes: 0 success/verified, 2 a mathematical
violation was found (so harnesses can assert expected violations), 1
operational errors.  --dry-run validates inputs and prints the plan only.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import (actions, covers, curvature, entropy, hyperbolicity, measures,
               packing, presets, reports, spaces)
from .exact import DomainError, WindowError, rational

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATION = 2


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _decode_point(value, space):
    """JSON point -> canonical point of the space."""
    if isinstance(value, str):
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value
    else:
        parsed = value
    return _coerce_point(parsed, space)


def _coerce_point(parsed, space):
    if isinstance(space, spaces.CayleySpace):
        return _tuplify(parsed)
    if isinstance(space, spaces.GluedLineSpace):
        kind = parsed[0]
        if kind == "line":
            return ("line", rational(parsed[1]))
        if kind == "hair":
            return ("hair", int(parsed[1]), rational(parsed[2]))
        if kind == "tip":
            return space.tip(int(parsed[1]))
        raise DomainError(f"unknown glued-line point {parsed!r}")
    if isinstance(parsed, list):
        return _tuplify(parsed)
    return parsed


def _tuplify(value):
    if isinstance(value, list):
        return tuple(_tuplify(v) for v in value)
    return value


def _weight_key(key):
    """JSON object keys are strings; decode vertex labels where possible."""
    try:
        return _tuplify(json.loads(key))
    except (json.JSONDecodeError, TypeError):
        return key


class _Inputs:
    def __init__(self, args):
        self.args = args
        self.space = None
        self.action = None
        self.measure = None
        if getattr(args, "preset", None):
            self._from_preset(args.preset)
        if getattr(args, "space", None):
            spec = _load_json(args.space)
            self.space = spaces.space_from_spec(spec)
            action_spec = spec.get("action")
            if getattr(args, "action", None):
                action_spec = _load_json(args.action)
            wants_deck = (isinstance(action_spec, dict)
                          and action_spec.get("action") == "deck")
            if spec.get("measure") == "pullback" or wants_deck:
                self._lift_to_cover(spec)
                return
            if action_spec:
                self.action = actions.action_from_spec(action_spec, self.space)
            measure_spec = spec.get("measure_spec", {"measure": "vertex_uniform"})
            if "measure" in spec:
                measure_spec = {"measure": spec["measure"]}
                if "weights" in spec:
                    measure_spec["weights"] = spec["weights"]
                if "basepoint" in spec:
                    measure_spec["basepoint"] = _coerce_point(
                        spec["basepoint"], self.space)
            self.measure = measures.measure_from_spec(measure_spec, self.space,
                                                      action=self.action)
        if self.space is None:
            raise DomainError("no --space file and no --preset given")
        if getattr(args, "measure", None):
            self.measure = measures.measure_from_spec(
                {"measure": args.measure}, self.space, action=self.action)

    def _lift_to_cover(self, spec):
        """'measure: pullback' / 'action: deck' lift the whole problem to the
        universal cover of the declared graph."""
        if not isinstance(self.space, spaces.WeightedGraph):
            raise DomainError("pullback/deck specs need a graph space")
        cover_spec = spec.get("cover", {})
        basepoint = cover_spec.get(
            "basepoint",
            sorted(self.space.vertices, key=spaces.point_key)[0])
        window = rational(cover_spec.get("window", 8))
        cover = covers.universal_cover(self.space, basepoint, window)
        base_measure = measures.VertexMeasure(
            weights={_weight_key(k): rational(v)
                     for k, v in spec["weights"].items()}
            if "weights" in spec else None)
        self.space = cover.space
        self.action = covers.deck_action(cover)
        self.measure = measures.PullbackMeasure(cover, base_measure)

    def _from_preset(self, name):
        table = {
            "lattice2": presets.lattice_instance,
            "free2": presets.free_instance,
            "atom": presets.atom_instance,
        }
        if name in table:
            self.space, self.action, self.measure = table[name]()
        elif name.startswith("torus"):
            self.space, self.action, self.measure = presets.torus_instance(
                int(name[len("torus"):] or 5))
        elif name.startswith("line"):
            self.space, self.action, self.measure = \
                presets.line_translation_instance(int(name[len("line"):] or 1))
        elif name == "glued-line":
            self.space, self.action, self.measure = presets.glued_line_instance()
        else:
            raise DomainError(f"unknown preset {name!r}")

    def point(self, raw, default=None):
        if raw is None:
            if default is not None:
                return default
            if isinstance(self.space, spaces.CayleySpace):
                return self.space.identity()
            if isinstance(self.space, spaces.GluedLineSpace):
                return self.space.tip(0)
            return self.space.support()[0]
        return _decode_point(raw, self.space)


def _emit(args, report: reports.Report, summary: str):
    if getattr(args, "format", "json") == "csv":
        reports.write_csv(report, sys.stdout)
    else:
        sys.stdout.write(report.to_json())
    print(summary, file=sys.stderr)
    if getattr(args, "csv", None):
        reports.export_csv(report, args.csv)


def _status_exit(status: str) -> int:
    if status in ("verified", "ok", "holds", "computed", "success"):
        return EXIT_OK
    if status == "violated":
        return EXIT_VIOLATION
    return EXIT_ERROR


def _dry_run(args, plan: str) -> int:
    if getattr(args, "dry_run", False):
        print(f"dry-run: {plan}", file=sys.stderr)
        return EXIT_OK
    return -1


# -- subcommand handlers -----------------------------------------------------


def cmd_validate(args):
    inp = _Inputs(args)
    rc = _dry_run(args, "validate the space description")
    if rc >= 0:
        return rc
    diag = inp.space.validate()
    status = "ok" if diag.get("ok") else "violated"
    rep = reports.Report(operation="validate", params={}, status=status,
                         result=diag, seed=args.seed)
    _emit(args, rep, f"validate: {status}")
    return _status_exit(status)


def cmd_balls(args):
    inp = _Inputs(args)
    rc = _dry_run(args, f"enumerate ball of radius {args.r}")
    if rc >= 0:
        return rc
    x = inp.point(args.center)
    r = rational(args.r)
    ball = spaces.enumerate_ball(inp.space, x, r, closed=args.closed)
    mass = None
    if inp.measure is not None:
        mass = measures.ball_mass(inp.measure, inp.space, x, r,
                                  closed=args.closed)
    rep = reports.Report(
        operation="balls",
        params={"center": x, "r": r, "closed": args.closed},
        status="computed",
        result={"count": len(ball), "mass": mass,
                "points": [p for p, _ in ball[:200]]},
        seed=args.seed)
    _emit(args, rep, f"ball: {len(ball)} support points, mass {mass}")
    return EXIT_OK


def _certificate_payload(cert):
    payload = {
        "status": cert.status,
        "r_min": cert.r_min, "r_max": cert.r_max,
        "critical_radii_checked": cert.critical_radii_checked,
        "violations": cert.violations,
        "center": cert.center,
        "notes": cert.notes,
        "ratio_scan": list(cert.scan_rows),
    }
    witnesses = []
    if cert.witness is not None:
        witnesses.append({"kind": "worst", "radius": cert.witness.radius,
                          "lhs": cert.witness.lhs, "rhs": cert.witness.rhs,
                          "form": cert.witness.form})
    if cert.first_violation is not None:
        witnesses.append({"kind": "first",
                          "radius": cert.first_violation.radius,
                          "lhs": cert.first_violation.lhs,
                          "rhs": cert.first_violation.rhs,
                          "form": cert.first_violation.form})
    return payload, witnesses


def cmd_certify_bg(args):
    inp = _Inputs(args)
    rc = _dry_run(args, "scan the weak concentric-ball inequality")
    if rc >= 0:
        return rc
    params = curvature.BGParams(rational(args.r0), args.C, args.K)
    centers = inp.point(args.center)
    if args.all_centers:
        centers = [inp.point(raw) for raw in args.all_centers.split(";")]
    cert = curvature.check_weak_bg(inp.space, inp.measure, centers, params,
                                   rational(args.rmax))
    payload, witnesses = _certificate_payload(cert)
    rep = reports.Report(operation="certify-bg",
                         params={"r0": params.r0, "C": params.C, "K": params.K,
                                 "rmax": rational(args.rmax)},
                         status=cert.status, result=payload,
                         witnesses=witnesses, seed=args.seed)
    _emit(args, rep, f"certify-bg: {cert.status}")
    return _status_exit(cert.status)


def cmd_synthetic(args):
    inp = _Inputs(args)
    rc = _dry_run(args, "scan the dimension-style growth condition")
    if rc >= 0:
        return rc
    params = curvature.SyntheticParams(args.N, args.K)
    cert = curvature.check_bg_synthetic(inp.space, inp.measure,
                                        inp.point(args.center), params,
                                        rational(args.rmax))
    payload, witnesses = _certificate_payload(cert)
    rep = reports.Report(operation="synthetic",
                         params={"N": args.N, "K": args.K,
                                 "rmax": rational(args.rmax)},
                         status=cert.status, result=payload,
                         witnesses=witnesses, seed=args.seed)
    _emit(args, rep, f"synthetic: {cert.status}")
    return _status_exit(cert.status)


def cmd_doubling(args):
    inp = _Inputs(args)
    rc = _dry_run(args, "compute the doubling constant on [r0/2, 5r0/2]")
    if rc >= 0:
        return rc
    sup, where = curvature.doubling_constant(inp.space, inp.measure,
                                             inp.point(args.center),
                                             rational(args.r0))
    rep = reports.Report(operation="doubling",
                         params={"r0": rational(args.r0)},
                         status="computed",
                         result={"C0": sup, "C0_float": float(sup),
                                 "attained_at": where},
                         seed=args.seed)
    _emit(args, rep, f"doubling: C0 = {float(sup):.6g} at r = {where}")
    return EXIT_OK


def cmd_entropy(args):
    inp = _Inputs(args)
    rc = _dry_run(args, "sample the growth profile and estimate entropy")
    if rc >= 0:
        return rc
    x = inp.point(args.center)
    prof = entropy.growth_profile(inp.space, inp.measure, x,
                                  rational(args.rmax), rational(args.step))
    est = entropy.entropy_estimate(prof, tail_fraction=args.tail)
    rep = reports.Report(
        operation="entropy",
        params={"rmax": rational(args.rmax), "step": rational(args.step),
                "tail": args.tail},
        status="computed",
        result={"estimate": est.estimate, "window_low": est.window_low,
                "window_high": est.window_high, "converged": est.converged,
                "growth_profile": [(s.R, s.mass, s.h) for s in prof.samples]},
        assumptions=est.notes, seed=args.seed)
    _emit(args, rep, f"entropy: {est.estimate:.6g} "
                     f"window [{est.window_low:.6g}, {est.window_high:.6g}]")
    return EXIT_OK


def cmd_delta(args):
    inp = _Inputs(args)
    rc = _dry_run(args, "estimate the hyperbolicity constant")
    if rc >= 0:
        return rc
    if args.thin:
        if not isinstance(inp.space, spaces.WeightedGraph):
            raise DomainError("--thin needs a graph space")
        rep_h = hyperbolicity.thin_triangle_delta(inp.space, count=args.samples,
                                                  seed=args.seed or 0)
    else:
        mode = "exhaustive" if args.exhaustive or not args.samples else "sampled"
        points = None
        if not isinstance(inp.space, (spaces.WeightedGraph,
                                      spaces.FiniteMetricSpace,
                                      spaces.TripodSpace)):
            x = inp.point(None)
            points = [p for p, _ in spaces.enumerate_ball(
                inp.space, x, rational(args.radius), closed=True)]
        rep_h = hyperbolicity.four_point_delta(
            inp.space, points=points, mode=mode,
            count=args.samples or 2000, seed=args.seed or 0)
    rep = reports.Report(operation="delta",
                         params={"method": rep_h.method},
                         status="computed",
                         result={"delta": rep_h.delta,
                                 "delta_float": float(rep_h.delta),
                                 "points_used": rep_h.points_used},
                         witnesses=[rep_h.witness], seed=args.seed)
    _emit(args, rep, f"delta: {float(rep_h.delta):.6g} by {rep_h.method}")
    return EXIT_OK


def cmd_convexity(args):
    inp = _Inputs(args)
    rc = _dry_run(args, "scan the geodesic convexity defect")
    if rc >= 0:
        return rc
    if not isinstance(inp.space, spaces.WeightedGraph):
        raise DomainError("convexity defect needs a graph space")
    rep_c = hyperbolicity.convexity_defect(inp.space, grid=args.grid)
    rep = reports.Report(operation="convexity", params={"grid": args.grid},
                         status="computed",
                         result={"defect": rep_c.defect,
                                 "defect_float": float(rep_c.defect),
                                 "samples": rep_c.samples},
                         witnesses=[rep_c.witness], seed=args.seed)
    _emit(args, rep, f"convexity defect: {float(rep_c.defect):.6g}")
    return EXIT_OK


def cmd_pack(args):
    inp = _Inputs(args)
    rc = _dry_run(args, "compute a packing count")
    if rc >= 0:
        return rc
    x = inp.point(args.center)
    mode = "exact" if args.exact else "greedy"
    if args.orbit:
        if inp.action is None:
            raise DomainError("--orbit needs an action")
        res = packing.gamma_packing_count(inp.action, x, rational(args.r),
                                          rational(args.R), mode=mode,
                                          cap=args.cap)
    else:
        res = packing.packing_count(inp.space, x, rational(args.r),
                                    rational(args.R), mode=mode, cap=args.cap)
    rep = reports.Report(operation="pack",
                         params={"r": rational(args.r), "R": rational(args.R),
                                 "mode": mode, "orbit": bool(args.orbit)},
                         status="computed",
                         result={"count": res.count, "method": res.method,
                                 "candidates": res.candidates,
                                 "centers": res.centers[:100]},
                         seed=args.seed)
    _emit(args, rep, f"pack: {res.count} ({res.method})")
    return EXIT_OK


def _systole_command(args, want):
    inp = _Inputs(args)
    rc = _dry_run(args, f"compute {want} over the sampled domain")
    if rc >= 0:
        return rc
    if inp.action is None:
        raise DomainError(f"{want} needs an action")
    sample = [inp.point(raw) for raw in (args.sample.split(";")
                                         if args.sample else [None])]
    rep_s = actions.systole(inp.action, sample, ceiling=args.ceiling)
    rep = reports.Report(
        operation=want,
        params={"sample_size": len(sample)},
        status="computed",
        result={"systole": rep_s.systole, "diastole": rep_s.diastole,
                "torsion_free_systole": rep_s.torsion_free_systole,
                "torsion_free_diastole": rep_s.torsion_free_diastole,
                "per_point": [(p.point, p.systole, p.torsion_free_systole)
                              for p in rep_s.per_point]},
        assumptions=(["sample-based statistics over the listed points"]
                     + rep_s.warnings),
        seed=args.seed)
    headline = rep_s.systole if want == "systole" else rep_s.diastole
    _emit(args, rep, f"{want}: {headline}")
    return EXIT_OK


def cmd_systole(args):
    return _systole_command(args, "systole")


def cmd_diastole(args):
    return _systole_command(args, "diastole")


def cmd_thin_set(args):
    inp = _Inputs(args)
    rc = _dry_run(args, "classify the sampled thin set")
    if rc >= 0:
        return rc
    if inp.action is None:
        raise DomainError("thin-set needs an action")
    sample = [inp.point(raw) for raw in args.sample.split(";")]
    adjacency = {p: [] for p in sample}
    for i, p in enumerate(sample):
        for q in sample[i + 1:]:
            if inp.space.distance(p, q) <= rational(args.adjacency):
                adjacency[p].append(q)
                adjacency[q].append(p)
    rep_t = actions.thin_set(inp.action, rational(args.r), sample, adjacency,
                             ceiling=args.ceiling)
    rep = reports.Report(
        operation="thin-set",
        params={"r": rational(args.r), "adjacency": rational(args.adjacency)},
        status="computed",
        result={"verdict": rep_t.verdict,
                "torsion_free_verdict": rep_t.torsion_free_verdict,
                "membership": [(p, m) for p, m in rep_t.membership.items()]},
        seed=args.seed)
    _emit(args, rep, f"thin-set: {rep_t.verdict}")
    return EXIT_OK


def cmd_margulis(args):
    inp = _Inputs(args)
    rc = _dry_run(args, "scan displacement radii for nilpotency flips")
    if rc >= 0:
        return rc
    if inp.action is None:
        raise DomainError("margulis needs an action")
    sample = [inp.point(raw) for raw in (args.sample.split(";")
                                         if args.sample else [None])]
    pts = actions.margulis_estimate(inp.action, sample,
                                    ceiling=rational(args.ceiling))
    rep = reports.Report(
        operation="margulis",
        params={"ceiling": rational(args.ceiling)},
        status="computed",
        result={"per_point": [(p.point, p.estimate, p.attained,
                               p.provenance) for p in pts],
                "entropy_margulis_constant": "alpha0(delta0,H0)"},
        assumptions=["the entropy-Margulis constant alpha0(delta0,H0) has no "
                     "published value and is reported symbolically only"],
        seed=args.seed)
    _emit(args, rep, f"margulis: min estimate "
                     f"{min(float(p.estimate) for p in pts):.6g}")
    return EXIT_OK


def cmd_short_gens(args):
    inp = _Inputs(args)
    rc = _dry_run(args, "greedy short generating family")
    if rc >= 0:
        return rc
    if inp.action is None:
        raise DomainError("short-gens needs an action")
    res = actions.short_generators(inp.action, inp.point(args.center),
                                   rational(args.R))
    status = "ok" if (res.reach_ok and res.separation_ok) else "violated"
    rep = reports.Report(
        operation="short-gens",
        params={"R": rational(args.R)},
        status=status,
        result={"count": len(res.elements),
                "codiameter": res.codiameter,
                "index_verdict": res.index_verdict, "index": res.index,
                "orbit_points": res.orbit_points[:100]},
        seed=args.seed)
    _emit(args, rep, f"short-gens: {len(res.elements)} generators, "
                     f"index {res.index} ({res.index_verdict})")
    return _status_exit(status)


def _nu_oracle(args):
    raw = getattr(args, "nu_table", None)
    if not raw:
        return None
    if raw.strip().startswith("["):
        table = json.loads(raw)
    else:
        table = _load_json(raw)
        if isinstance(table, dict):
            table = table["nu_table"]
    return actions.NuOracle(table)


def cmd_bounds(args):
    rc = _dry_run(args, f"evaluate bound formula {args.kind}")
    if rc >= 0:
        return rc
    params = {}
    for name in ("N", "K", "D", "C", "r0", "delta", "eps0", "C0", "r"):
        value = getattr(args, name, None)
        if value is not None:
            params[name] = value
    value = actions.evaluate_bound(args.kind, params, nu=_nu_oracle(args))
    rep = reports.Report(operation="bounds",
                         params={"kind": args.kind, **params},
                         status="computed", result={"value": value},
                         seed=args.seed)
    _emit(args, rep, f"bounds {args.kind}: {value:.9g}")
    return EXIT_OK


def cmd_check(args):
    rc = _dry_run(args, f"cross-check measured value against {args.kind}")
    if rc >= 0:
        return rc
    params = json.loads(args.params)
    rep_c = actions.bound_cross_check(args.kind, args.measured, params,
                                      nu=_nu_oracle(args),
                                      assumptions=args.assume or [])
    status = "holds" if rep_c.holds else "violated"
    rep = reports.Report(operation="check",
                         params={"kind": args.kind, "measured": args.measured,
                                 **params},
                         status=status,
                         result={"bound": rep_c.bound, "slack": rep_c.slack,
                                 "direction": rep_c.direction},
                         assumptions=rep_c.assumptions, seed=args.seed)
    _emit(args, rep, f"check {args.kind}: {status} (slack {rep_c.slack:.6g})")
    return _status_exit(status)


def cmd_reproduce(args):
    rc = _dry_run(args, f"reproduce scenario {args.scenario}")
    if rc >= 0:
        return rc
    if args.scenario != "glued-line":
        raise DomainError(f"unknown scenario {args.scenario!r}")
    space, action, measure = presets.glued_line_instance(args.r0, args.eps)
    r0 = rational(args.r0)
    params = curvature.BGParams(r0, args.C, args.K)
    cert = curvature.check_weak_bg(space, measure, space.tip(0), params,
                                   r0 + 4 * space.eps)
    payload, witnesses = _certificate_payload(cert)
    payload["ball_at_r0_plus_eps"] = measures.ball_mass(
        measure, space, space.tip(0), r0 + space.eps, closed=False)
    payload["ball_at_doubled"] = measures.ball_mass(
        measure, space, space.tip(0), 2 * (r0 + space.eps), closed=False)
    rep = reports.Report(operation="reproduce",
                         params={"scenario": args.scenario, "r0": r0,
                                 "eps": rational(args.eps), "C": args.C,
                                 "K": args.K},
                         status=cert.status, result=payload,
                         witnesses=witnesses, seed=args.seed)
    _emit(args, rep, f"reproduce {args.scenario}: {cert.status}")
    return _status_exit(cert.status)


def cmd_cover(args):
    inp = _Inputs(args)
    rc = _dry_run(args, "materialize the universal cover window")
    if rc >= 0:
        return rc
    if not isinstance(inp.space, spaces.WeightedGraph):
        raise DomainError("cover needs a graph space")
    base = inp.point(args.center, default=sorted(
        inp.space.vertices, key=spaces.point_key)[0])
    cover = covers.universal_cover(inp.space, base, rational(args.window))
    rep = reports.Report(
        operation="cover",
        params={"window": rational(args.window)},
        status="computed",
        result={"betti": cover.betti(),
                "vertices_materialized": len(cover.vertices),
                "deck_rank": len(cover.generator_words)},
        seed=args.seed)
    _emit(args, rep, f"cover: b1 = {cover.betti()}, "
                     f"{len(cover.vertices)} vertices in window")
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def _add_common(sub, center=True):
    sub.add_argument("--space", help="space description JSON file")
    sub.add_argument("--action", help="action description JSON file")
    sub.add_argument("--measure",
                     help="override: counting_orbit or vertex_uniform")
    sub.add_argument("--preset", help="bundled instance "
                     "(lattice2, free2, atom, torusM, lineM, glued-line)")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--threads", type=int, default=1,
                     help="accepted for compatibility; evaluation is "
                          "deterministic and sequential")
    sub.add_argument("--format", choices=["json", "csv"], default="json")
    sub.add_argument("--csv", help="also write the tabular payload to CSV")
    sub.add_argument("--dry-run", action="store_true")
    if center:
        sub.add_argument("--center", help="center point (JSON)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bgkit",
        description="exact growth/curvature/packing checks on discrete "
                    "metric measure spaces")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("validate", help="metric diagnostics for a space")
    _add_common(p, center=False)
    p.set_defaults(handler=cmd_validate)

    p = subs.add_parser("balls", help="enumerate a ball and its mass")
    _add_common(p)
    p.add_argument("--r", required=True)
    p.add_argument("--closed", action="store_true")
    p.set_defaults(handler=cmd_balls)

    p = subs.add_parser("certify-bg", help="weak concentric-ball certificate")
    _add_common(p)
    p.add_argument("--r0", required=True)
    p.add_argument("--C", type=float, required=True)
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--rmax", required=True)
    p.add_argument("--all-centers", dest="all_centers",
                   help="semicolon-separated center list")
    p.set_defaults(handler=cmd_certify_bg)

    p = subs.add_parser("synthetic", help="dimension-style growth certificate")
    _add_common(p)
    p.add_argument("--N", type=float, required=True)
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--rmax", required=True)
    p.set_defaults(handler=cmd_synthetic)

    p = subs.add_parser("doubling", help="doubling constant on [r0/2, 5r0/2]")
    _add_common(p)
    p.add_argument("--r0", required=True)
    p.set_defaults(handler=cmd_doubling)

    p = subs.add_parser("entropy", help="growth profile and entropy estimate")
    _add_common(p)
    p.add_argument("--rmax", required=True)
    p.add_argument("--step", default="1")
    p.add_argument("--tail", type=float, default=0.3)
    p.set_defaults(handler=cmd_entropy)

    p = subs.add_parser("delta", help="hyperbolicity constants")
    _add_common(p)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--samples", type=int)
    p.add_argument("--thin", action="store_true",
                   help="thin-triangle constant along graph geodesics")
    p.add_argument("--radius", default="3",
                   help="ball radius supplying points on infinite spaces")
    p.set_defaults(handler=cmd_delta)

    p = subs.add_parser("convexity", help="geodesic convexity defect")
    _add_common(p)
    p.add_argument("--grid", type=int, default=8)
    p.set_defaults(handler=cmd_convexity)

    p = subs.add_parser("pack", help="packing counts")
    _add_common(p)
    p.add_argument("--r", required=True)
    p.add_argument("--R", required=True)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--orbit", action="store_true",
                   help="restrict centers to the orbit of the center point")
    p.add_argument("--cap", type=int, default=packing.EXACT_CAP)
    p.set_defaults(handler=cmd_pack)

    for name, handler in (("systole", cmd_systole), ("diastole", cmd_diastole)):
        p = subs.add_parser(name, help=f"{name} over a sampled domain")
        _add_common(p, center=False)
        p.add_argument("--sample", help="semicolon-separated point list")
        p.add_argument("--ceiling")
        p.set_defaults(handler=handler)

    p = subs.add_parser("thin-set", help="thin-set membership and connectivity")
    _add_common(p, center=False)
    p.add_argument("--r", required=True)
    p.add_argument("--sample", required=True)
    p.add_argument("--adjacency", default="1",
                   help="sample points within this distance are adjacent")
    p.add_argument("--ceiling")
    p.set_defaults(handler=cmd_thin_set)

    p = subs.add_parser("margulis", help="nilpotency flip radii")
    _add_common(p, center=False)
    p.add_argument("--sample")
    p.add_argument("--ceiling", required=True)
    p.set_defaults(handler=cmd_margulis)

    p = subs.add_parser("short-gens", help="short generating family")
    _add_common(p)
    p.add_argument("--R", required=True)
    p.set_defaults(handler=cmd_short_gens)

    p = subs.add_parser("bounds", help="evaluate an explicit bound formula")
    p.add_argument("kind")
    for flag in ("--N", "--K", "--D", "--C", "--r0", "--delta", "--eps0",
                 "--C0", "--r"):
        p.add_argument(flag, type=float, dest=flag.lstrip("-"))
    p.add_argument("--nu-table", dest="nu_table",
                   help='step table as JSON, e.g. "[[10,3],[1e6,7]]"')
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dry-run", action="store_true")
    p.add_argument("--csv")
    p.set_defaults(handler=cmd_bounds)

    p = subs.add_parser("check", help="measured quantity vs bound formula")
    p.add_argument("kind")
    p.add_argument("--measured", type=float, required=True)
    p.add_argument("--params", required=True, help="bound parameters as JSON")
    p.add_argument("--assume", action="append")
    p.add_argument("--nu-table", dest="nu_table")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dry-run", action="store_true")
    p.add_argument("--csv")
    p.set_defaults(handler=cmd_check)

    p = subs.add_parser("reproduce",
                        help="rebuild a bundled counterexample scenario")
    p.add_argument("scenario", help="glued-line")
    p.add_argument("--r0", default="1")
    p.add_argument("--eps", default="1/10")
    p.add_argument("--C", type=float, default=4.0)
    p.add_argument("--K", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dry-run", action="store_true")
    p.add_argument("--csv")
    p.set_defaults(handler=cmd_reproduce)

    p = subs.add_parser("cover", help="universal cover window summary")
    _add_common(p)
    p.add_argument("--window", required=True)
    p.set_defaults(handler=cmd_cover)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code not in (0, None) else EXIT_OK
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.handler(args)
    except KeyError as exc:
        print(f"error: missing input field {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (DomainError, WindowError, FileNotFoundError, OverflowError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
