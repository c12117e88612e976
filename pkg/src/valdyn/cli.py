"""Batch driver: load TOML fixtures, run one operation, print a JSON report.

Exit codes: 0 success, 2 validation error, 3 inconclusive classification.
All logic lives in the library; this module only parses and serializes.
"""

from __future__ import annotations

import argparse
import logging
import os
import random
import sys
from fractions import Fraction

from . import cusp as cuspmod
from . import dynamics as dyn
from . import resolution as res
from . import transport as trans
from . import valuation as val
from .arith import parse_quad
from .cusp import CuspError
from .fixtures import (
    Fixture,
    FixtureError,
    emit_json,
    load_fixture,
    sample_edge_pairs,
    sample_edge_points,
)
from .resolution import GraphValidationError, UnrecognizedShapeError
from .transport import TableValidationError
from .valuation import QMValuation, format_valuation

VALIDATION_ERRORS = (
    GraphValidationError,
    TableValidationError,
    CuspError,
    dyn.SkeletonMapError,
    FixtureError,
    ValueError,
    KeyError,
    FileNotFoundError,
)
INCONCLUSIVE_ERRORS = (dyn.InconclusiveError, UnrecognizedShapeError)


def _error_kind(exc: Exception) -> str:
    return getattr(exc, "kind", type(exc).__name__.lower())


def _fmt_minpoly(q: dyn.QuadraticInteger) -> dict:
    return {"minpoly": list(q.minpoly), "approx": q.approx}


def _dot_graph(g: res.DualGraph) -> str:
    lines = ["graph dual {"]
    for p in g.primes:
        lines.append(
            f'  "{p.id}" [label="{p.id}\\ng={p.genus} e={p.self_int} b={p.b}"];'
        )
    for a, b in g.edges:
        lines.append(f'  "{a}" -- "{b}";')
    lines.append("}")
    return "\n".join(lines)


def _dot_fixed_set(fmap: dyn.SkeletonMap, rep: dyn.FixedSetReport) -> str:
    g = fmap.graph
    hot_vertices: set[str] = set()
    hot_edges: set[int] = set()
    if rep.vertex is not None:
        hot_vertices.add(rep.vertex)
    elif rep.kind == "circle-rotation":
        hot_edges.update(range(len(g.edges)))
        hot_vertices.update(p.id for p in g.primes)
    elif rep.loc is not None and rep.loc[0] == "edge":
        hot_edges.add(rep.loc[1])
    lines = ["graph fixed_set {"]
    for p in g.primes:
        style = ' style=filled fillcolor=red' if p.id in hot_vertices else ""
        lines.append(f'  "{p.id}" [label="{p.id}"{style}];')
    for i, (a, b) in enumerate(g.edges):
        style = " [color=red penwidth=2]" if i in hot_edges else ""
        lines.append(f'  "{a}" -- "{b}"{style};')
    lines.append("}")
    return "\n".join(lines)


# -- command implementations -------------------------------------------------------


def cmd_graph(op: str, fx: Fixture, args) -> dict:
    g = fx.graph()
    if op == "check":
        m = res.intersection_matrix(g)
        return {
            "primes": len(g.primes),
            "edges": len(g.edges),
            "negative_definite": res.check_negative_definite(m),
        }
    if op == "dualbasis":
        inv = res.dual_basis(g)
        return {
            p.id: [inv[i][j] for i in range(g.n())]
            for j, p in enumerate(g.primes)
        }
    if op == "discrepancy":
        t = res.canonical_coeffs(g)
        return {
            p.id: {
                "k": t.k[i],
                "A_div": t.a_div(p.id),
                "A_norm": t.a_norm(p.id),
            }
            for i, p in enumerate(g.primes)
        }
    if op == "skeleton":
        sk = res.essential_skeleton(g)
        return {
            "primes": sorted(sk.prime_ids),
            "edges": [list(e) for e in sk.edges],
            "empty": sk.is_empty(),
        }
    if op == "classify":
        c = res.classify_singularity(g)
        return {"level": c.level, "subtype": c.subtype, "min_A_norm": c.min_a_norm}
    raise FixtureError("unknown_op", f"graph {op}")


def cmd_val(op: str, fx: Fixture, args) -> dict:
    g = fx.graph()
    nu = fx.valuation(args.nu)
    if op == "skewness":
        return {"nu": format_valuation(nu, g), "alpha": val.skewness(nu, g)}
    mu = fx.valuation(args.mu)
    if op == "beta":
        return {"beta": val.rel_skewness(nu, mu, g)}
    if op == "rho":
        d = val.angular_distance(nu, mu, g)
        return {"exact_exp": d.exact_exp, "log_value": d.log_value}
    if op == "leq":
        return {"leq": val.leq(nu, mu, g)}
    if op == "metric":
        return {"d": val.edge_metric(nu, mu, g)}
    raise FixtureError("unknown_op", f"val {op}")


def _fixed_report_json(rep: dyn.FixedSetReport, fmap: dyn.SkeletonMap) -> dict:
    out: dict = {"kind": rep.kind}
    if rep.vertex is not None:
        out["vertex"] = rep.vertex
    if rep.loc is not None and rep.weights is not None:
        out.update(dyn._loc_label(fmap, rep.loc, rep.weights))
    if rep.parameter_minpoly is not None:
        out["parameter_minpoly"] = list(rep.parameter_minpoly)
    if rep.rotation is not None:
        out["rotation"] = rep.rotation
        if rep.angle is not None:
            out["angle"] = rep.angle
        if rep.angle_witness is not None:
            out["witness"] = rep.angle_witness
    if rep.kind == "end":
        out["ray"] = rep.loc[1]
    if rep.kind == "segment":
        out["period"] = rep.period
    return out


def cmd_germ(op: str, fx: Fixture, args) -> dict:
    fmap = fx.germ()
    g = fmap.graph
    opt = fx.options
    steps = opt.get("orbit_steps", args.steps)
    m_max = opt.get("m_max", args.m_max)
    n_max = opt.get("n_max", args.n_max)
    if op == "apply":
        nu = fx.valuation(args.nu) if args.nu else _default_point(g)
        r = dyn.apply(nu, fmap)
        return {"image": _point_json(r.image, g), "rate": r.rate}
    if op in ("orbit", "rates"):
        nu = fx.valuation(args.nu) if args.nu else _default_point(g)
        orb = dyn.orbit(nu, fmap, steps)
        if op == "orbit":
            return {
                "points": [_point_json(p, g) for p, _ in orb],
                "rates": [c for _, c in orb],
            }
        return {"rates": [c for _, c in orb]}
    if op == "recursion":
        nu = fx.valuation(args.nu) if args.nu else _default_point(g)
        steps = max(steps, 2 * m_max + n_max + 2)
        orb = dyn.orbit(nu, fmap, steps)
        rec = dyn.detect_recursion([c for _, c in orb], m_max, n_max)
        if rec is None:
            return {"recursion": None}
        return {"recursion": {"m": rec.m, "a": rec.a, "b": rec.b, "N0": rec.n0}}
    if op == "degree":
        return _fmt_minpoly(dyn.dynamical_degree(fmap))
    if op == "fixed":
        rep = dyn.find_fixed_set(fmap)
        if args.dot:
            with open(args.dot, "w") as fh:
                fh.write(_dot_fixed_set(fmap, rep))
            args.dot = None  # already written with the highlight
        return _fixed_report_json(rep, fmap)
    if op == "nonexpansion":
        pairs = sample_edge_pairs(g, opt.get("pairs", args.pairs), args.seed)
        rep = dyn.check_nonexpansion(fmap, pairs)
        return {
            "pairs": len(rep.results),
            "all_nonexpanding": rep.all_nonexpanding,
            "all_strict": rep.all_strict,
            "all_equal": rep.all_equal,
        }
    if op == "stability":
        return dyn.stability_report(fmap)
    raise FixtureError("unknown_op", f"germ {op}")


def cmd_transport(op: str, fx: Fixture, args) -> dict:
    tbl = fx.transport()
    if op == "push":
        d = trans.pushforward_dual(args.prime, tbl)
        return {"divisor": {p.id: d[i] for i, p in enumerate(tbl.target.primes)}}
    if op == "pull":
        d = trans.pullback_dual(args.prime, tbl)
        return {
            "exceptional": {
                p.id: d.exceptional[i] for i, p in enumerate(tbl.source.primes)
            },
            "curves": {c: coef for c, coef in d.curve_parts},
        }
    if op == "rate":
        return {"rate": trans.attraction_rate_from_table(args.prime, tbl)}
    if op == "jacobian":
        fmap = fx.germ()
        r_f = fx.r_f() or tbl.r_f
        table = res.canonical_coeffs(fmap.graph)
        rng = random.Random(args.seed)
        checked = []
        for _ in range(args.samples):
            nu = sample_edge_points(fmap.graph, rng)
            r = dyn.apply(nu, fmap)
            ok = trans.jacobian_check(nu, r.image, r.rate, fmap.graph, table, r_f)
            checked.append(ok)
        return {"samples": len(checked), "all_hold": all(checked)}
    raise FixtureError("unknown_op", f"transport {op}")


def cmd_cusp(op: str, fx: Fixture, args) -> dict:
    if fx.cusp is None:
        raise FixtureError("no_cusp", "fixture has no [cusp] block")
    cd = fx.cusp
    alpha = fx.alpha
    if args.alpha:
        alpha = parse_quad(args.alpha, d=cd.d)
    if op == "build":
        return {
            "omega": cd.omega,
            "d": cd.d,
            "cycle": list(cd.cycle),
            "s": cd.s,
            "graph_primes": [p.id for p in cuspmod.cusp_dual_graph(cd).primes],
        }
    if op == "unit":
        eps = cuspmod.fundamental_unit(cd)
        return {"eps_omega": eps, "eps": cd.epsilon(), "norm": eps.norm()}
    if op == "validate":
        if alpha is None:
            raise FixtureError("no_alpha", "supply --alpha or a cusp alpha")
        v = cuspmod.validate_alpha(alpha, cd)
        return {"ok": v.ok, "degree": v.degree, "reason": v.reason}
    if op == "rotation":
        if alpha is None:
            raise FixtureError("no_alpha", "supply --alpha or a cusp alpha")
        rot = cuspmod.rotation_number(alpha, cd)
        return {
            "rational": rot.rational is not None,
            "beta": rot.beta_float,
            "value": rot.rational,
        }
    if op == "induce":
        if alpha is None:
            raise FixtureError("no_alpha", "supply --alpha or a cusp alpha")
        fmap = cuspmod.induced_skeleton_map(alpha, cd)
        return {
            "sectors": [
                {
                    "src": _loc_str(s.src, fmap),
                    "cone": [
                        "0" if s.lo is None else s.lo,
                        "inf" if s.hi is None else s.hi,
                    ],
                    "matrix": [list(r) for r in s.matrix],
                    "dst": _loc_str(s.dst, fmap),
                }
                for s in fmap.sectors
            ],
            "degree": _fmt_minpoly(dyn.dynamical_degree(fmap)),
        }
    if op == "example":
        a = cuspmod.irrational_example(cd)
        rot = cuspmod.rotation_number(a, cd)
        return {"alpha": a, "degree": int(a.norm()), "beta": rot.beta_float}
    raise FixtureError("unknown_op", f"cusp {op}")


def _loc_str(loc, fmap: dyn.SkeletonMap) -> str:
    kind, key = loc
    if kind == "edge":
        a, b, occ = fmap.graph.handle_of_index(key)
        return f"edge:({a},{b})#{occ}"
    return f"ray:{key}"


def _point_json(p, g: res.DualGraph):
    if isinstance(p, dyn.RayPoint):
        return {"ray": p.ray_id, "a": p.a, "b": p.b}
    return format_valuation(p, g)


def _default_point(g: res.DualGraph) -> QMValuation:
    p = g.primes[0]
    return QMValuation.at_vertex(p.id, Fraction(1, p.b))


GROUPS = {
    "graph": (cmd_graph, ["check", "dualbasis", "discrepancy", "skeleton", "classify"]),
    "val": (cmd_val, ["skewness", "beta", "rho", "leq", "metric"]),
    "germ": (
        cmd_germ,
        ["apply", "orbit", "rates", "recursion", "degree", "fixed", "nonexpansion", "stability"],
    ),
    "transport": (cmd_transport, ["push", "pull", "rate", "jacobian"]),
    "cusp": (cmd_cusp, ["build", "unit", "validate", "rotation", "induce", "example"]),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="valdyn", description=__doc__)
    sub = ap.add_subparsers(dest="group", required=True)
    for group, (_fn, ops) in GROUPS.items():
        gp = sub.add_parser(group)
        gsub = gp.add_subparsers(dest="op", required=True)
        for op in ops:
            p = gsub.add_parser(op)
            p.add_argument("fixture")
            p.add_argument("--nu", help="valuation literal")
            p.add_argument("--mu", help="valuation literal")
            p.add_argument("--prime", help="prime id")
            p.add_argument("--alpha", help="quadratic element literal")
            p.add_argument("--steps", type=int, default=24)
            p.add_argument("--pairs", type=int, default=100)
            p.add_argument("--samples", type=int, default=20)
            p.add_argument("--m-max", type=int, default=6)
            p.add_argument("--n-max", type=int, default=8)
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--dot", help="write a DOT rendering of the dual graph")
    return ap


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("VALDYN_LOG", "WARNING"))
    args = build_parser().parse_args(argv)
    fn, _ops = GROUPS[args.group]
    try:
        fx = load_fixture(args.fixture)
        out = fn(args.op, fx, args)
        if args.dot:
            with open(args.dot, "w") as fh:
                fh.write(_dot_graph(fx.graph()))
        print(emit_json(out))
        return 0
    except INCONCLUSIVE_ERRORS as exc:
        print(emit_json({"error": {"kind": _error_kind(exc), "message": str(exc)}}))
        return 3
    except VALIDATION_ERRORS as exc:
        print(emit_json({"error": {"kind": _error_kind(exc), "message": str(exc)}}))
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
