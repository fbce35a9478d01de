"""Command-line interface: ``klac {bounds,construct,privacy,simulate,sweep}``.

Exit codes: 0 success, 2 input error, 3 infeasible within caps, 4 a client
failed to decode during simulation.
"""

from __future__ import annotations

import argparse
import csv
import io
import random
import sys

from . import sweep as sweep_mod
from .errors import Infeasible, InputError, SimulationFailure
from .gf2 import format_matrix, parse_matrix
from .graph import branch_search, nested_scheme, scr
from .instance import build_fitting_matrix, complete, parse_instance, random_setup
from .privacy import PrivacyReport, privacy_report
from .protocol import run_protocol
from .universal import build_scheme, full_assignment, lower_bound_Tk, scheme_size

GRAPH_SCHEMES = ("scr", "branch-search", "nested")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _need(args, *names: str) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise InputError(f"missing required flag(s): {' '.join(missing)}")


def _resolve_n(args) -> int:
    if args.n_expr is not None:
        return sweep_mod.eval_n_expr(args.n_expr, args.T)
    _need(args, "n")
    values = sweep_mod.parse_int_list(args.n)
    if len(values) != 1:
        raise InputError("this command takes a single n")
    return values[0]


def _k_values(args) -> tuple[int, ...]:
    if args.k is not None:
        return sweep_mod.parse_int_list(args.k)
    if args.k_min is not None or args.k_max is not None:
        _need(args, "T")
        lo = 1 if args.k_min is None else args.k_min
        hi = args.T if args.k_max is None else args.k_max
        if lo > hi:
            raise InputError(f"empty k range [{lo}, {hi}]")
        return tuple(range(lo, hi + 1))
    raise InputError("missing --k (or --k-min/--k-max)")


# subcommands --------------------------------------------------------------

def cmd_bounds(args) -> int:
    _need(args, "T")
    n = _resolve_n(args)
    ks = _k_values(args)
    if len(ks) == 1:
        _write(args.output, f"{lower_bound_Tk(args.T, n, ks[0])}\n")
        return 0
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["T", "n", "k", "lb", "scheme1", "ub_uncoded"])
    for k in ks:
        w.writerow([args.T, n, k, lower_bound_Tk(args.T, n, k), scheme_size(args.T, n, k), n])
    _write(args.output, buf.getvalue())
    return 0


def cmd_construct(args) -> int:
    ks = _k_values(args)
    if len(ks) != 1:
        raise InputError("construct takes a single k")
    k = ks[0]
    scheme = args.scheme or "scheme1"
    D = parse_matrix(_read(args.input)) if args.input else None
    if D is not None:
        if args.T is not None and args.T != D.ncols:
            raise InputError(f"--T {args.T} disagrees with the input width {D.ncols}")
        args.T = D.ncols
    _need(args, "T")
    T = args.T

    if scheme == "scheme1":
        n = D.nrows if D is not None else _resolve_n(args)
        s = build_scheme(T, n, k, vectors=D)
        P = s.P
        assignment = full_assignment(s, D) if D is not None else None
    elif scheme in GRAPH_SCHEMES:
        if D is None:
            raise InputError(f"{scheme} needs the client coefficient vectors via --input")
        trace: list | None = [] if args.trace else None
        if scheme == "scr":
            res = scr(D, k=k, trace=trace)
        elif scheme == "nested":
            res = nested_scheme(D)
            if res is None:
                raise Infeasible("outbound sets do not form a chain; no nested scheme")
        else:
            res = branch_search(D, k, args.size_cap, args.node_budget, args.time_budget)
            if trace is not None:
                trace.append(res.info)
        res.check(D)
        if args.size_cap is not None and res.size > args.size_cap:
            raise Infeasible(f"no scheme within size cap {args.size_cap} (best {res.size})")
        if trace is not None:
            for item in trace:
                print(f"# {item}", file=sys.stderr)
        P, assignment = res.P, res.assignment()
    else:
        raise InputError(f"unknown scheme {scheme!r}")

    _write(args.output, format_matrix(P))
    if args.assignment:
        if assignment is None:
            raise InputError("an assignment needs the client vectors via --input")
        _write(args.assignment, assignment.to_csv())
    return 0


def cmd_privacy(args) -> int:
    _need(args, "m", "T")
    s = 0 if args.s is None else args.s
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PrivacyReport.FIELDS)
    for k in _k_values(args):
        w.writerow(privacy_report(args.m, args.T, k, s).as_row())
    _write(args.output, buf.getvalue())
    return 0


def cmd_simulate(args) -> int:
    ks = _k_values(args)
    if len(ks) != 1:
        raise InputError("simulate takes a single k")
    k = ks[0]
    rng = random.Random(args.seed)
    if args.input:
        inst = parse_instance(_read(args.input))
        fm = build_fitting_matrix(inst)
        if args.completion:
            setup = complete(fm, "external", parse_matrix(_read(args.completion)))
        else:
            setup = complete(fm, "zeros")
    else:
        _need(args, "T")
        n = _resolve_n(args)
        m = args.m if args.m is not None else max(n, args.T)
        inst, setup = random_setup(args.T, n, m, rng)
    D = setup.coefficients()
    T = setup.T
    if not 1 <= k <= T:
        raise InputError(f"k={k} outside [1, T={T}]")
    scheme = args.scheme or "scheme1"
    if scheme == "scheme1":
        sch = build_scheme(T, inst.n, k, vectors=D)
    elif scheme == "scr":
        sch = scr(D, k=k)
    elif scheme == "branch-search":
        sch = branch_search(D, k, args.size_cap, args.node_budget, args.time_budget)
    elif scheme == "nested":
        sch = nested_scheme(D)
        if sch is None:
            raise Infeasible("outbound sets do not form a chain; no nested scheme")
    else:
        raise InputError(f"unknown scheme {scheme!r}")
    log = run_protocol(inst, setup, sch, F=args.F, seed=args.seed)
    _write(args.output, log.to_csv())
    return 0


def cmd_sweep(args) -> int:
    overrides = {}
    if args.k is not None or args.k_min is not None or args.k_max is not None:
        if args.T is None and (args.k_max is None and args.k is None):
            raise InputError("--k-min without --k-max needs --T")
        overrides["ks"] = _k_values(args)
    if args.n_expr is not None:
        _need(args, "T")
        overrides["ns"] = (sweep_mod.eval_n_expr(args.n_expr, args.T),)
        overrides["n_expr"] = args.n_expr
    elif args.n is not None:
        overrides["ns"] = sweep_mod.parse_int_list(args.n)
    if args.scheme is not None:
        overrides["schemes"] = tuple(s.strip() for s in args.scheme.split(","))
    spec = sweep_mod.preset(
        args.experiment, args.T,
        instances=args.instances, seed=args.seed, size_cap=args.size_cap,
        node_budget=args.node_budget, time_budget=args.time_budget, **overrides,
    )
    rows = sweep_mod.run_sweep(spec)
    _write(args.output, sweep_mod.to_csv(rows))
    return 0


# parser ---------------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--T", type=int, help="code length (rows of A)")
    p.add_argument("--k", help="access limit: value, list a,b or range a:b")
    p.add_argument("--k-min", type=int)
    p.add_argument("--k-max", type=int)
    p.add_argument("--n", help="number of clients: value, list or range a:b")
    p.add_argument("--n-expr", help="n as an expression in T: 2^T-1, T^4, T^2")
    p.add_argument("--output", "-o", help="output file (default stdout)")


def _search_flags(p: argparse.ArgumentParser, node_default) -> None:
    p.add_argument("--scheme", help="scheme1, scr, branch-search or nested")
    p.add_argument("--size-cap", type=int, help="largest scheme the subset search may return")
    p.add_argument("--time-budget", type=float, default=sweep_mod.DEFAULT_TIME_BUDGET,
                   help="seconds of subset search per instance (default %(default)s)")
    p.add_argument("--node-budget", type=int, default=node_default,
                   help="search nodes per instance (default %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="klac", description="k-limited-access index coding toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="lower bound on T_k")
    _common(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("construct", help="build a scheme matrix P")
    _common(p)
    _search_flags(p, None)
    p.add_argument("--input", help="client coefficient vectors (matrix text format)")
    p.add_argument("--assignment", help="write the per-client row CSV here")
    p.add_argument("--trace", action="store_true", help="dump SCR circuits / search info to stderr")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("privacy", help="entropy and MIL metrics as CSV")
    _common(p)
    p.add_argument("--m", type=int, help="number of messages")
    p.add_argument("--s", type=int, help="side-information size of the curious client")
    p.set_defaults(func=cmd_privacy)

    p = sub.add_parser("simulate", help="run the transmission protocol")
    _common(p)
    _search_flags(p, None)
    p.add_argument("--input", help="instance file (m n / q : side info)")
    p.add_argument("--completion", help="completed fitting matrix G (matrix text format)")
    p.add_argument("--m", type=int, help="number of messages for random instances")
    p.add_argument("--F", type=int, default=64, help="message size in bits")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="experiment sweeps as CSV")
    p.add_argument("experiment", choices=sweep_mod.EXPERIMENTS)
    _common(p)
    _search_flags(p, sweep_mod.DEFAULT_NODE_BUDGET)
    p.add_argument("--instances", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", action="store_true", help="accepted for symmetry; sweeps do not trace")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except SimulationFailure as exc:
        print(f"simulation failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
