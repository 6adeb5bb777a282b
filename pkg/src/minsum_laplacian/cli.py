"""Command-line entry point: ``minsum solve | verify | experiment | generate``.

Exit codes are 0 on success, 1 when a verification suite fails and 2 for
input errors (unreadable files, bad parameters, violated preconditions).

CSV schemas
-----------
``solve --csv``
    ``t,estimate_max_abs[,error_<norm>...]``. Error columns appear only when
    the exact baseline was computed.
``experiment tv-decay --csv``
    ``t,norm`` for ``t = 1..t_max``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import experiments as X
from . import graph as G
from . import verify as V
from .errors import InvalidParameter, MinSumError, NotConverged
from .exact import l2, l_inf, l_norm, solve_exact
from .minsum_flow import estimate_flow, estimate_flow_averaged, init_flow, step_flow
from .minsum_voltage import (
    estimate_voltage,
    estimate_voltage_averaged,
    init_voltage,
    step_voltage,
)

VOLTAGE_NORMS = ("l_inf", "l2", "L_norm")
FLOW_NORMS = ("l_inf", "l2", "R_norm")


class _Parser(argparse.ArgumentParser):
    # usage errors share the input-error exit code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _fmt(x):
    return repr(float(x))


# -- solve -------------------------------------------------------------------


def _error_norm(kind, v, graph):
    if kind == "l_inf":
        return l_inf(v)
    if kind == "l2":
        return l2(v)
    if kind == "L_norm":
        return l_norm(v, graph)
    # R-weighted energy norm of a flow
    return float(np.sqrt(np.sum(np.asarray(v) ** 2 / graph.weights)))


def _voltage_estimates(graph, b, iters, averaged):
    state = init_voltage(graph)
    prev = None
    for t in range(1, iters + 1):
        prev, state = state, step_voltage(state, graph, b)
        if not averaged:
            yield t, estimate_voltage(state, graph, b)
        elif t >= 4:
            yield t, estimate_voltage_averaged(prev, state, graph, b)


def _core_flow_estimates(graph, b, iters, averaged):
    state = init_flow(graph)
    prev = None
    for t in range(1, iters + 1):
        prev, state = state, step_flow(state, graph, b)
        if not averaged:
            yield t, estimate_flow(state, graph)
        elif t >= 4:
            yield t, estimate_flow_averaged(prev, state, graph)


def _flow_estimates(graph, b, iters, averaged):
    core = G.leaf_strip(graph, b)
    fixed = np.zeros(graph.n_edges)
    for e, x in core.fixed_flows.items():
        fixed[e] = x
    if core.graph.n_edges == 0:
        for t in range(4 if averaged else 1, iters + 1):
            yield t, fixed.copy()
        return
    for t, x in _core_flow_estimates(core.graph, core.injection, iters, averaged):
        out = fixed.copy()
        out[core.edge_map] = x
        yield t, out


def solve_report(problem, graph, b, iters, averaged=False, norms=None):
    """Run one solver and collect per-iteration errors against the exact solution.

    Returns a JSON-serialisable dict. Timings are kept under ``"timings"``.
    """
    if iters < 1:
        raise InvalidParameter(f"iters must be >= 1, got {iters}")
    if averaged:
        if iters < 4:
            raise InvalidParameter(f"--averaged needs iters >= 4, got {iters}")
        G.require_regular(graph)
    allowed = VOLTAGE_NORMS if problem == "voltage" else FLOW_NORMS
    norms = list(allowed if not norms else norms)
    for k in norms:
        if k not in allowed:
            raise InvalidParameter(f"norm {k!r} not available for {problem}; choose from {allowed}")
    b = G.check_injection(b, graph)

    timings = {}
    t0 = time.perf_counter()
    exact = None
    try:
        sol = solve_exact(graph, b)
        exact = sol.voltages if problem == "voltage" else sol.flows
    except NotConverged:
        pass
    timings["exact"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    run = _voltage_estimates if problem == "voltage" else _flow_estimates
    records, final = [], None
    for t, est in run(graph, b, iters, averaged):
        rec = {"t": t, "estimate_max_abs": l_inf(est)}
        if exact is not None:
            err = exact - est
            rec["errors"] = {k: _error_norm(k, err, graph) for k in norms}
        records.append(rec)
        final = est
    timings["solver"] = time.perf_counter() - t0
    return {
        "config": {
            "problem": problem,
            "n_vertices": graph.n_vertices,
            "n_edges": graph.n_edges,
            "iters": iters,
            "averaged": averaged,
            "norms": norms,
        },
        "exact_available": exact is not None,
        "records": records,
        "final_estimate": [float(x) for x in final],
        "exact": None if exact is None else [float(x) for x in exact],
        "timings": timings,
    }


def _solve_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    norms = report["config"]["norms"] if report["exact_available"] else []
    w.writerow(["t", "estimate_max_abs"] + [f"error_{k}" for k in norms])
    for rec in report["records"]:
        w.writerow([rec["t"], _fmt(rec["estimate_max_abs"])] + [_fmt(rec["errors"][k]) for k in norms])
    return buf.getvalue()


def _solve_text(report):
    cfg = report["config"]
    lines = [
        f"{cfg['problem']} min-sum on n={cfg['n_vertices']}, m={cfg['n_edges']}, "
        f"iters={cfg['iters']}{', averaged' if cfg['averaged'] else ''}"
    ]
    if not report["exact_available"]:
        lines.append("exact solve did not converge; error columns omitted")
    norms = cfg["norms"] if report["exact_available"] else []
    lines.append("  ".join(["t".rjust(4), "max|est|".rjust(12)] + [f"err_{k}".rjust(12) for k in norms]))
    for rec in report["records"]:
        cols = [str(rec["t"]).rjust(4), f"{rec['estimate_max_abs']:12.6g}"]
        cols += [f"{rec['errors'][k]:12.6g}" for k in norms]
        lines.append("  ".join(cols))
    return "\n".join(lines) + "\n"


def cmd_solve(args):
    graph = G.read_graph(args.graph)
    b = G.read_injection(args.injection, graph.n_vertices)
    report = solve_report(args.problem, graph, b, args.iters, args.averaged, args.norms)
    if not args.timings:
        report.pop("timings")
    if args.json:
        out = json.dumps(report, indent=2) + "\n"
    elif args.csv:
        out = _solve_csv(report)
    else:
        out = _solve_text(report)
    sys.stdout.write(out)
    if args.timings and not args.json:
        t = report["timings"]
        print(f"timings: exact {t['exact']:.3f}s, solver {t['solver']:.3f}s", file=sys.stderr)
    return 0


# -- verify ------------------------------------------------------------------


def cmd_verify(args):
    names = list(V.SUITES) if args.suite == "all" else [args.suite]
    results = [V.run(name) for name in names]
    if args.json:
        payload = [
            {
                "suite": r.suite,
                "passed": r.passed,
                "max_residual": r.max_residual,
                "checks": len(r.checks),
                "failures": [
                    {"name": c.name, "residual": c.residual, "tol": c.tol} for c in r.checks if not c.passed
                ],
            }
            for r in results
        ]
        print(json.dumps(payload, indent=2))
    else:
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            print(f"{status} {r.suite}: {len(r.checks)} checks, max residual {r.max_residual:.3e}")
            for c in r.checks:
                if not c.passed:
                    print(f"  failed {c.name}: residual {c.residual:.3e} >= tol {c.tol:.1e}")
    return 0 if all(r.passed for r in results) else 1


# -- experiment --------------------------------------------------------------


def decay_csv(t, values):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "norm"])
    for a, v in zip(t, values):
        w.writerow([int(a), _fmt(v)])
    return buf.getvalue()


def cmd_tv_decay(args):
    t, vals, fit = X.tv_decay(args.family, args.d, args.n, args.t_max, args.which)
    text = decay_csv(t, vals)
    if args.csv:
        Path(args.csv).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.svg:
        title = f"{args.which} {args.family} d={args.d} n={args.n}"
        Path(args.svg).write_text(X.svg_plot(t, vals, title), encoding="utf-8")
    if fit.ok:
        msg = f"slope {fit.slope:.4f} over t <= {fit.window} ({fit.n_points} points)"
    else:
        msg = f"no fit: {fit.n_points} usable points with t <= {fit.window}, need {X.MIN_FIT_POINTS}"
    # keep stdout a clean table when it carries the CSV
    print(msg, file=sys.stderr if not args.csv else sys.stdout)
    return 0


# -- generate ----------------------------------------------------------------


def cmd_generate(args):
    try:
        params = [int(p) for p in args.params]
    except ValueError:
        raise InvalidParameter(f"parameters must be integers, got {args.params}") from None
    try:
        if args.family == "torus":
            graph = G.generate("torus", params, weight=args.weight)
        else:
            graph = G.generate(args.family, *params, weight=args.weight)
    except TypeError:
        raise InvalidParameter(f"wrong number of parameters for {args.family}: {params}") from None
    text = G.format_graph(graph)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.dipole:
        s, t = args.dipole
        b = G.dipole(graph.n_vertices, s, t)
        if args.injection_out:
            G.write_injection(b, args.injection_out)
        else:
            for v in (s, t):
                print(f"{v} {b[v]!r}")
    return 0


def build_parser():
    p = _Parser(prog="minsum", description="Min-sum solvers for Laplacian systems and electrical flows.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="run a min-sum solver and report errors against the exact solution")
    s.add_argument("problem", choices=("voltage", "flow"))
    s.add_argument("graph", help="edge file with 'tail head weight' lines")
    s.add_argument("injection", help="file with 'vertex value' lines")
    s.add_argument("--iters", type=int, required=True)
    s.add_argument("--averaged", action="store_true", help="two-step averaged estimate (regular graphs, t >= 4)")
    s.add_argument("--norms", nargs="+", metavar="NORM", help="voltage: l_inf l2 L_norm; flow: l_inf l2 R_norm")
    fmt = s.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--csv", action="store_true")
    s.add_argument("--timings", action="store_true", help="report wall-clock timings")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="run verification suites over the built-in corpus")
    v.add_argument("suite", choices=list(V.SUITES) + ["all"])
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("experiment", help="numerical experiments")
    esub = e.add_subparsers(dest="experiment", required=True, parser_class=_Parser)
    tv = esub.add_parser("tv-decay", help="decay of walk difference norms with t")
    tv.add_argument("--family", choices=X.FAMILIES, required=True)
    tv.add_argument("--d", type=int, required=True, help="even degree >= 4")
    tv.add_argument("--n", type=int, required=True, help="vertices (cycle) or side length (torus)")
    tv.add_argument("--t-max", type=int, required=True)
    tv.add_argument("--which", choices=X.WHICH, default="delta")
    tv.add_argument("--csv", metavar="PATH", help="write the table here instead of stdout")
    tv.add_argument("--svg", metavar="PATH", help="write a log-log line plot")
    tv.set_defaults(func=cmd_tv_decay)

    g = sub.add_parser("generate", help="write a graph from a named family")
    g.add_argument("family", choices=("cycle", "k_connected_cycle", "torus", "petersen", "complete"))
    g.add_argument("params", nargs="*", help="cycle N | k_connected_cycle N K | torus D1 D2 ... | complete N")
    g.add_argument("--weight", type=float, default=1.0)
    g.add_argument("--out", metavar="PATH")
    g.add_argument("--dipole", nargs=2, type=int, metavar=("S", "T"), help="also emit a unit dipole injection")
    g.add_argument("--injection-out", metavar="PATH")
    g.set_defaults(func=cmd_generate)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MinSumError, OSError) as exc:
        print(f"minsum: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
