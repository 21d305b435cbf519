"""Command-line frontend: verification suites, two-point computations and
decay certificates with machine-readable JSON reports.

Every run emits {"command", "inputs", "results", "checks", "timing"} with
rationals serialised as "p/q" strings; exit status is 0 when all checks
pass, 1 on check failures, 2 on parse errors and 3 on capacity errors.
Identical configuration and seed reproduce the report byte for byte
(pass --no-timing to drop the wall-clock field).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
import time
from fractions import Fraction

from .bounds import (activity_bound_check, decay_bound, InteractionClass,
                     verify_section32_norms)
from .cluster import (ActivityTable, exp_partition_identity_check,
                      mayer_bound, polymer_identity_check, two_point_series)
from .forests import (arboreal_Z, duality_check, kirchhoff_tree_sum,
                      rooted_forest_det_check, spanning_tree_sum_enumeration)
from .grassmann import CapacityError
from .graphs import WeightedGraph
from .model import H0Model, ModelParams
from .rational import format_rational, parse_rational
from .singlesite import (SingleSiteParams, e_squared_lower_bound,
                         one_point_norm_ratios, ratio_R, single_site_Z,
                         single_site_Z_engine)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE_ERROR = 2
EXIT_CAPACITY = 3


def _encode(obj):
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, float) and (math.isinf(obj) or math.isnan(obj)):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, (frozenset, set)):
        return sorted(_encode(v) for v in obj)
    return obj


def _check(name, lhs, rhs, ok, tolerance="0"):
    return {"name": name, "status": "pass" if ok else "fail",
            "lhs": _encode(lhs), "rhs": _encode(rhs), "tolerance": tolerance}


def _pool_map(fn, items):
    """Order-preserving map, optionally threaded via HYPERFERMI_THREADS.

    Results are exact and independent of the schedule, so threading only
    changes wall-clock time, never report contents.
    """
    workers = int(os.environ.get("HYPERFERMI_THREADS", "1") or "1")
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _load_graph(args) -> WeightedGraph:
    if getattr(args, "graph", None):
        return WeightedGraph.from_json_file(args.graph)
    if getattr(args, "lattice", None):
        return WeightedGraph.from_shorthand(args.lattice)
    raise ValueError("provide --graph FILE or --lattice SPEC")


def _apply_eps(graph: WeightedGraph, eps) -> WeightedGraph:
    if eps is None:
        return graph
    e = parse_rational(eps)
    return WeightedGraph(graph.vertices, graph.edges,
                         {v: e for v in graph.vertices})


def _emit(report: dict, args) -> None:
    if getattr(args, "no_timing", False):
        report.pop("timing", None)
    text = json.dumps(_encode(report), indent=2, sort_keys=True)
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _finish(report: dict, args, started: float) -> int:
    report["timing"] = round(time.time() - started, 3)
    checks = report.get("checks", [])
    failed = [c for c in checks if c.get("status") != "pass"]
    report["passed"] = not failed
    _emit(report, args)
    return EXIT_OK if not failed else EXIT_CHECK_FAILED


def _rand_fraction(rng: random.Random, num_max: int = 6, den_max: int = 6,
                   allow_zero: bool = True) -> Fraction:
    lo = 0 if allow_zero else 1
    return Fraction(rng.randint(lo, num_max), rng.randint(1, den_max))


def _random_graph(rng: random.Random, max_vertices: int, max_edges: int) -> WeightedGraph:
    n = rng.randint(2, max_vertices)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    rng.shuffle(pairs)
    count = rng.randint(1, min(max_edges, len(pairs)))
    edges = [(i, j, Fraction(rng.randint(1, 8), rng.randint(1, 8)))
             for (i, j) in pairs[:count]]
    eps = {v: Fraction(rng.randint(0, 4), rng.randint(1, 4)) for v in range(n)}
    return WeightedGraph(range(n), edges, eps)


# -- subcommands ---------------------------------------------------------------


def cmd_verify_single_site(args) -> int:
    started = time.time()
    checks = []
    eps_list = [parse_rational(e) for e in args.eps_list.split(",")]
    for m in range(args.mmax + 1):
        for eps in eps_list:
            p = SingleSiteParams(m, eps)
            closed = single_site_Z(p)
            engine = single_site_Z_engine(p)
            checks.append(_check("Z closed == engine (m=%d, eps=%s)"
                                 % (m, format_rational(eps)),
                                 closed, engine, closed == engine))
    bound = e_squared_lower_bound()
    worst = Fraction(0)
    for m in range(args.ratio_mmax + 1):
        for l in range(m + 1):
            r = ratio_R(l, m)
            worst = max(worst, r)
            if r > bound:
                checks.append(_check("R(l=%d, m=%d) <= e^2" % (l, m), r, bound, False))
    checks.append(_check("max R over l <= m <= %d below e^2" % args.ratio_mmax,
                         worst, bound, worst <= bound))
    threshold = parse_rational(args.threshold)
    worst_ratio = Fraction(0)
    for m in range(1, args.norm_mmax + 1):
        for eps in eps_list:
            q, pr = one_point_norm_ratios(SingleSiteParams(m, eps))
            worst_ratio = max(worst_ratio, q, pr)
    checks.append(_check("one-point norm ratios <= %s (m <= %d)"
                         % (args.threshold, args.norm_mmax),
                         worst_ratio, threshold, worst_ratio <= threshold))
    report = {"command": "verify-single-site",
              "inputs": {"mmax": args.mmax, "ratio_mmax": args.ratio_mmax,
                         "norm_mmax": args.norm_mmax,
                         "eps_list": args.eps_list},
              "results": {"max_R": worst, "max_norm_ratio": worst_ratio},
              "checks": checks}
    return _finish(report, args, started)


def cmd_verify_polymer(args) -> int:
    started = time.time()
    rng = random.Random(args.seed)
    base = _load_graph(args)
    checks = []
    trials = []
    for trial in range(args.trials):
        beta = _rand_fraction(rng, allow_zero=False)
        eps = _rand_fraction(rng)
        trials.append((trial, beta, eps))

    def run(item):
        trial, beta, eps = item
        g = _apply_eps(base, eps)
        params = ModelParams(beta, args.m)
        ok, residual, lhs, rhs = polymer_identity_check(g, params)
        return _check("polymer identity (trial %d, beta=%s, eps=%s)"
                      % (trial, format_rational(beta), format_rational(eps)),
                      lhs, rhs, ok)

    checks.extend(_pool_map(run, trials))
    report = {"command": "verify-polymer",
              "inputs": {"m": args.m, "trials": args.trials, "seed": args.seed,
                         "graph": base.to_json_dict()},
              "results": {},
              "checks": checks}
    return _finish(report, args, started)


def cmd_verify_arboreal(args) -> int:
    started = time.time()
    rng = random.Random(args.seed)
    graphs = []
    if args.graph or args.lattice:
        graphs.append((0, _load_graph(args)))
    for _trial in range(args.trials):
        graphs.append((len(graphs), _random_graph(rng, args.max_vertices,
                                                  args.max_edges)))
    # draw the diagonal fields up front so threading cannot reorder them
    items = [(idx, g, {v: Fraction(rng.randint(0, 5), rng.randint(1, 3))
                       for v in g.vertices}) for idx, g in graphs]

    def run(item):
        idx, g, d = item
        eq, za, zh = duality_check(g)
        out = [_check("duality on graph %d (n=%d)" % (idx, g.n), za, zh, eq)]
        ts_det = kirchhoff_tree_sum(g)
        ts_enum = spanning_tree_sum_enumeration(g)
        out.append(_check("matrix-tree on graph %d" % idx, ts_det, ts_enum,
                          ts_det == ts_enum))
        eqd, det, forest_sum = rooted_forest_det_check(g, d)
        out.append(_check("rooted-forest det on graph %d" % idx, det,
                          forest_sum, eqd))
        return out

    checks = []
    for out in _pool_map(run, items):
        checks.extend(out)
    report = {"command": "verify-arboreal",
              "inputs": {"trials": args.trials, "seed": args.seed,
                         "max_vertices": args.max_vertices,
                         "max_edges": args.max_edges},
              "results": {"graphs": len(graphs)},
              "checks": checks}
    return _finish(report, args, started)


def cmd_verify_norms(args) -> int:
    started = time.time()
    base = _load_graph(args)
    checks = []
    for m in [int(x) for x in args.m_list.split(",")]:
        for beta in [parse_rational(b) for b in args.beta_list.split(",")]:
            rep = verify_section32_norms(ModelParams(beta, m), base)
            for c in rep["checks"]:
                c = dict(c)
                c["name"] = "m=%d beta=%s: %s" % (m, format_rational(beta),
                                                  c["name"])
                c.setdefault("tolerance", "0")
                checks.append(c)
    report = {"command": "verify-norms",
              "inputs": {"m_list": args.m_list, "beta_list": args.beta_list,
                         "graph": base.to_json_dict()},
              "results": {},
              "checks": checks}
    return _finish(report, args, started)


def cmd_two_point(args) -> int:
    started = time.time()
    base = _load_graph(args)
    g = _apply_eps(base, args.eps)
    if args.mode == "exact":
        params = ModelParams(parse_rational(args.beta), args.m)
    else:
        beta = float(parse_rational(args.beta)) if "/" in args.beta \
            else float(args.beta)
        params = ModelParams(beta, args.m, mode="float")
    model = H0Model(g, params)
    value = model.two_point(args.i, args.j, args.alpha)
    results = {"two_point": value}
    checks = []
    if args.series:
        table = ActivityTable(g, params)
        sr = two_point_series(g, params, args.i, args.j, args.alpha,
                              N_max=args.nmax, table=table)
        mb = mayer_bound(g, params, args.i, args.j, args.alpha, table=table)
        results["series_partial_sums"] = sr.partial_sums
        results["series_tail_bound"] = sr.tail_bound
        results["series_convergent"] = sr.convergent
        results["mayer_A"] = mb.A_value
        results["mayer_B"] = mb.B_value
        results["mayer_bound"] = mb.bound
        if sr.convergent:
            err = abs(float(sr.partial_sums[-1] - value))
            checks.append(_check("partial sum within certified tail",
                                 err, sr.tail_bound, err <= sr.tail_bound,
                                 tolerance="certified tail"))
        checks.append(_check("|two_point| <= mayer bound",
                             abs(float(value)), mb.bound,
                             abs(float(value)) <= mb.bound,
                             tolerance="certified bound"))
    report = {"command": "two-point",
              "inputs": {"graph": g.to_json_dict(), "m": args.m,
                         "beta": args.beta, "eps": args.eps,
                         "i": args.i, "j": args.j, "alpha": args.alpha,
                         "mode": args.mode},
              "results": results,
              "checks": checks}
    return _finish(report, args, started)


def cmd_bound(args) -> int:
    started = time.time()
    cls = InteractionClass(kind=args.klass, d=args.d, a=args.a,
                           metric=args.metric)
    rep = decay_bound(cls, args.beta, args.m, args.dist, C=args.C,
                      radius=args.radius)
    report = {"command": "bound",
              "inputs": rep.inputs,
              "results": rep.to_json_dict(),
              "checks": [_check("series convergent", rep.B_value, 1.0,
                                rep.convergent, tolerance="B < 1")]}
    return _finish(report, args, started)


def cmd_constants(args) -> int:
    started = time.time()
    base = _load_graph(args)
    rows = []
    for m in [int(x) for x in args.m_list.split(",")]:
        for beta in [parse_rational(b) for b in args.beta_list.split(",")]:
            params = ModelParams(beta, m)
            rep = activity_bound_check(base, params, Ymax=args.ymax,
                                       include_observable=True)
            rows.append({"m": m, "beta": format_rational(beta),
                         "beta_m": rep["beta_m"], "C_emp": rep["C_emp"],
                         "C_emp_obs": rep["C_emp_obs"],
                         "passes": rep["passes"]})
    lines = ["m,beta,beta_m,C_emp,C_emp_obs,passes"]
    for r in rows:
        lines.append("%d,%s,%.6g,%.6g,%.6g,%s"
                     % (r["m"], r["beta"], r["beta_m"], r["C_emp"],
                        r["C_emp_obs"], r["passes"]))
    csv_text = "\n".join(lines) + "\n"
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(csv_text)
    report = {"command": "constants",
              "inputs": {"m_list": args.m_list, "beta_list": args.beta_list,
                         "ymax": args.ymax},
              "results": {"rows": rows},
              "checks": [_check("all activity ratios certified",
                                all(r["passes"] for r in rows), True,
                                all(r["passes"] for r in rows))]}
    if not args.csv:
        report["results"]["csv"] = csv_text
    return _finish(report, args, started)


def cmd_verify_exp_identity(args) -> int:
    started = time.time()
    rng = random.Random(args.seed)
    checks = []
    for trial in range(args.trials):
        f = [Fraction(rng.randint(-6, 6), rng.randint(1, 4))
             for _ in range(args.support)]
        ok, lhs, rhs = exp_partition_identity_check(f, args.nmax)
        checks.append(_check("exponential identity trial %d" % trial,
                             lhs, rhs, ok))
    report = {"command": "verify-exp-identity",
              "inputs": {"trials": args.trials, "seed": args.seed,
                         "nmax": args.nmax, "support": args.support},
              "results": {},
              "checks": checks}
    return _finish(report, args, started)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperfermi",
        description="Exact verification toolkit for the fermionic lattice "
                    "model, its polymer expansion and the arboreal duality.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, graph=True):
        p.add_argument("--out", help="write the JSON report here")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--no-timing", action="store_true",
                       help="omit wall-clock timing for byte-identical reports")
        if graph:
            p.add_argument("--graph", help="graph JSON file")
            p.add_argument("--lattice", help="lattice shorthand, e.g. 1d:6 or 2d:2x3")

    p = sub.add_parser("verify-single-site", help="closed forms vs engine")
    common(p, graph=False)
    p.add_argument("--mmax", type=int, default=6)
    p.add_argument("--ratio-mmax", type=int, default=40)
    p.add_argument("--norm-mmax", type=int, default=10)
    p.add_argument("--eps-list", default="0,1/2,1,3")
    p.add_argument("--threshold", default="8")
    p.set_defaults(fn=cmd_verify_single_site)

    p = sub.add_parser("verify-polymer", help="hard-core polymer gas identity")
    common(p)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(fn=cmd_verify_polymer)

    p = sub.add_parser("verify-arboreal", help="arboreal duality and matrix-tree")
    common(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--max-vertices", type=int, default=6)
    p.add_argument("--max-edges", type=int, default=9)
    p.set_defaults(fn=cmd_verify_arboreal)

    p = sub.add_parser("verify-norms", help="interaction norm estimates")
    common(p)
    p.add_argument("--m-list", default="1,2,3")
    p.add_argument("--beta-list", default="1/10,1/100")
    p.set_defaults(fn=cmd_verify_norms)

    p = sub.add_parser("verify-exp-identity", help="partition exponential identity")
    common(p, graph=False)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--nmax", type=int, default=6)
    p.add_argument("--support", type=int, default=3)
    p.set_defaults(fn=cmd_verify_exp_identity)

    p = sub.add_parser("two-point", help="exact two-point function")
    common(p)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--beta", required=True, help="rational like 1/50")
    p.add_argument("--eps", default="0")
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--alpha", type=int, default=1)
    p.add_argument("--mode", choices=["exact", "float"], default="exact")
    p.add_argument("--series", action="store_true",
                   help="add polymer series partial sums and bounds")
    p.add_argument("--nmax", type=int, default=3)
    p.set_defaults(fn=cmd_two_point)

    p = sub.add_parser("bound", help="decay-bound certificate")
    common(p, graph=False)
    p.add_argument("--class", dest="klass", choices=["nn", "exp", "poly"],
                   required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--dist", type=float, default=1.0)
    p.add_argument("--a", type=float, default=2.0)
    p.add_argument("--metric", choices=["euclidean", "log"], default="euclidean")
    p.add_argument("--C", type=float, default=math.e)
    p.add_argument("--radius", type=int, default=200)
    p.set_defaults(fn=cmd_bound)

    p = sub.add_parser("constants", help="extract empirical activity constants")
    common(p)
    p.add_argument("--m-list", default="1")
    p.add_argument("--beta-list", default="1/20")
    p.add_argument("--ymax", type=int, default=None)
    p.add_argument("--csv", help="write the C_emp table here")
    p.set_defaults(fn=cmd_constants)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE_ERROR if exc.code not in (0,) else 0
    try:
        return args.fn(args)
    except CapacityError as exc:
        print("capacity error: %s" % exc, file=sys.stderr)
        return EXIT_CAPACITY
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_PARSE_ERROR


if __name__ == "__main__":
    sys.exit(main())
