"""Command-line entry point ``treegreen``.

Subcommands::

    treegreen validate --config FILE
    treegreen green    --config FILE --at EDGE:POS [--grid N | --y EDGE:POS]
    treegreen solve    --config FILE [--grid N]
    treegreen compare  --config FILE --mode oracle|pokornyi [--n N] [--grid N] [--tolerance T]

The configuration is read from standard input when ``--config`` is omitted.
``--dump-config`` prints the normalized configuration instead of running the
command.  CSV goes to standard output and diagnostics to standard error.

Exit codes: 0 ok, 2 degenerate problem, 3 invalid configuration or
arguments, 4 comparison outside tolerance.
"""
from __future__ import annotations

import argparse
import sys

import numpy as np

from .compare import compare_oracle, compare_pokornyi, interior_grid
from .conditions import check_nondegenerate, delta_matrix, standard_functionals
from .config import load_config, parse_config
from .edgeode import fundamental_basis
from .errors import ConfigError, DegenerateProblem, SingularSystem, TreeGreenError
from .graph import GraphPoint, node_key
from .green import GreensFunction

__all__ = ["main", "format_value"]

EXIT_OK, EXIT_DEGENERATE, EXIT_CONFIG, EXIT_TOLERANCE = 0, 2, 3, 4
DEFAULT_TOLERANCE = {"pokornyi": 1e-6, "oracle": 5e-4}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # exit code 2 is reserved for degenerate problems
    def error(self, message):
        raise _UsageError(message)


def format_value(v: float) -> str:
    """12 significant digits, ``.`` as decimal point, no grouping."""
    s = f"{float(v):.12g}"
    return "0" if s == "-0" else s


def _csv(rows, out):
    out.write("edge,pos,value\n")
    for edge, pos, value in rows:
        out.write(f"{edge},{format_value(pos)},{format_value(value)}\n")


def _point(text, tree) -> GraphPoint:
    try:
        p = GraphPoint.parse(text, tree)
        return tree.point(p.edge, p.x)
    except (ValueError, KeyError, TreeGreenError) as exc:
        raise ConfigError(f"bad point {text!r}: {exc}") from None


def _greens(problem) -> GreensFunction:
    return GreensFunction(
        problem.tree, problem.coeffs, problem.bc,
        ode_tol=problem.tol["ode"], quad_tol=problem.tol["quad"],
    )


def _edges_sorted(tree):
    return sorted(tree.edges, key=lambda e: node_key(e.id))


def cmd_validate(problem, args, out) -> int:
    t = problem.tree
    fs = standard_functionals(t, problem.bc, problem.coeffs)
    basis = fundamental_basis(t, problem.coeffs, problem.tol["ode"])
    report = check_nondegenerate(delta_matrix(basis, fs, problem.coeffs))
    out.write(f"m={t.m}\n")
    out.write(f"boundary_nodes={len(t.boundary)}\n")
    out.write(f"det={format_value(report.det)}\n")
    out.write(f"rcond={format_value(report.rcond)}\n")
    out.write(f"nondegenerate={'true' if report.nondegenerate else 'false'}\n")
    return EXIT_OK if report.nondegenerate else EXIT_DEGENERATE


def cmd_green(problem, args, out) -> int:
    if args.at is None:
        raise ConfigError("green needs --at EDGE:POS")
    t = problem.tree
    x = _point(args.at, t)
    if t.at_node(x) is not None:
        raise ConfigError(f"--at {args.at} must be interior to its edge")
    g = _greens(problem)
    rows = []
    if args.y is not None:
        y = _point(args.y, t)
        rows.append((y.edge, y.x, g.green_eval(x, y)))
    else:
        n = 9 if args.grid is None else args.grid
        for e in _edges_sorted(t):
            ys = interior_grid(e.length, n)
            rows.extend(zip([e.id] * n, ys, g.kernel_row(x, e.id, ys)))
    _csv(rows, out)
    out.write(f"# solve-count={g.solve_count}\n")
    return EXIT_OK


def cmd_solve(problem, args, out) -> int:
    g = _greens(problem)
    h = problem.rhs if problem.rhs is not None else 0.0
    f = g.solve_general(h, problem.c)
    n = 11 if args.grid is None else args.grid
    if n < 2:
        raise ConfigError("--grid must be at least 2 for solve")
    rows = []
    for e in _edges_sorted(problem.tree):
        xs = np.linspace(0.0, e.length, n)
        rows.extend(zip([e.id] * n, xs, np.broadcast_to(f(e.id, xs), xs.shape)))
    _csv(rows, out)
    return EXIT_OK


def cmd_compare(problem, args, out) -> int:
    g = _greens(problem)
    tol = args.tolerance if args.tolerance is not None else DEFAULT_TOLERANCE[args.mode]
    if args.mode == "pokornyi":
        d = compare_pokornyi(g, 5 if args.grid is None else args.grid)
        out.write(f"mode=pokornyi samples={d.n_samples}\n")
        out.write(f"max_abs={format_value(d.abs)} max_rel={format_value(d.rel)}\n")
        ok = d.abs <= tol
    else:
        if problem.c is not None and any(problem.c):
            sys.stderr.write("note: nonzero c is ignored by the oracle comparison\n")
        try:
            res = compare_oracle(g, problem.bc, problem.rhs, n=args.n)
        except SingularSystem as exc:
            sys.stderr.write(f"oracle: {exc}\n")
            return EXIT_DEGENERATE
        k, s = res["kernel"], res["solution"]
        out.write(f"mode=oracle n={args.n}\n")
        out.write(f"kernel max_abs={format_value(k.abs)} max_rel={format_value(k.rel)}\n")
        out.write(f"solution max_abs={format_value(s.abs)} max_rel={format_value(s.rel)}\n")
        ok = max(k.rel, s.rel) <= tol
    out.write(f"tolerance={format_value(tol)} {'ok' if ok else 'FAILED'}\n")
    return EXIT_OK if ok else EXIT_TOLERANCE


COMMANDS = {"validate": cmd_validate, "green": cmd_green, "solve": cmd_solve, "compare": cmd_compare}


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="treegreen", description="Green's functions of Sturm-Liouville problems on trees")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="JSON problem file (default: standard input)")
    ap.add_argument("--at", help="source point x as EDGE:POS (green)")
    ap.add_argument("--y", help="single y point as EDGE:POS (green)")
    ap.add_argument("--grid", type=int, help="samples per edge")
    ap.add_argument("--mode", choices=["oracle", "pokornyi"], default="pokornyi", help="compare mode")
    ap.add_argument("--n", type=int, default=2000, help="finite-difference cells per edge (compare)")
    ap.add_argument("--tolerance", type=float, help="compare tolerance")
    ap.add_argument("--dump-config", action="store_true", help="print the normalized config and exit")
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(f"treegreen: {exc}\n")
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config) if args.config else parse_config(sys.stdin.read())
        if args.dump_config:
            out.write(cfg.dumps() + "\n")
            return EXIT_OK
        if args.grid is not None and args.grid < 1:
            raise ConfigError("--grid must be positive")
        problem = cfg.build()
        return COMMANDS[args.command](problem, args, out)
    except OSError as exc:
        sys.stderr.write(f"treegreen: cannot read config: {exc}\n")
        return EXIT_CONFIG
    except ConfigError as exc:
        sys.stderr.write(f"treegreen: invalid config: {exc}\n")
        return EXIT_CONFIG
    except DegenerateProblem as exc:
        sys.stderr.write(f"treegreen: degenerate problem: {exc}\n")
        return EXIT_DEGENERATE
    except TreeGreenError as exc:
        sys.stderr.write(f"treegreen: {type(exc).__name__}: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
