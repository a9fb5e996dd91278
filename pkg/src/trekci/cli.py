"""Command-line interface.

Exit codes: 0 success or independent, 1 dependent or verification failure,
2 input error, 3 no witness can exist, 4 witness search exhausted.
"""

from __future__ import annotations

import argparse
import sys
import time
from typing import List, Optional

from . import __version__
from .formats import (
    bidirected_to_json, dump_json, load_json, matrix_to_csv, parse_vertex_list,
    read_graph, write_samples,
)
from .graph_core import trek_graph
from .lyapunov_numeric import DEFAULT_TOL
from .markov import DEFAULT_MAX_N, EnumerationCapError, ci_implied, enumerate_elementary_ci

EXIT_OK, EXIT_DEPENDENT, EXIT_INPUT, EXIT_PRECONDITION, EXIT_EXHAUSTED = range(5)


class InputError(ValueError):
    pass


def _emit(obj, out: Optional[str]) -> None:
    text = dump_json(obj, out)
    if out is None:
        sys.stdout.write(text)


def _triple(args):
    g = read_graph(args.graph)
    K = parse_vertex_list(args.K)
    try:
        ci_implied(g, {args.i}, {args.j}, K)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return g, K


def cmd_trek_graph(args) -> int:
    _emit(bidirected_to_json(trek_graph(read_graph(args.graph))), args.out)
    return EXIT_OK


def cmd_ci(args) -> int:
    g, K = _triple(args)
    stmt = ci_implied(g, {args.i}, {args.j}, K)
    _emit(stmt.to_json(), None)
    return EXIT_OK if stmt.implied else EXIT_DEPENDENT


def cmd_enumerate(args) -> int:
    g = read_graph(args.graph)
    try:
        stmts = enumerate_elementary_ci(g, args.max_n)
    except EnumerationCapError as exc:
        raise InputError(str(exc)) from exc
    if args.implied_only:
        stmts = [s for s in stmts if s.implied]
    _emit([s.to_json() for s in stmts], args.out)
    return EXIT_OK


def cmd_witness(args) -> int:
    from .witness import SweepExhaustedError, WitnessPreconditionError, find_witness

    g, K = _triple(args)
    try:
        w = find_witness(g, args.i, args.j, K)
    except WitnessPreconditionError as exc:
        print(f"no witness: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except SweepExhaustedError as exc:
        print(f"witness search exhausted: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    _emit(w.to_json(), args.out)
    print(f"witness for ({args.i},{args.j}|{sorted(K)}): minor {w.minor_value:.6g}, "
          f"margin {w.margin:.3g}, zeta {w.zeta}, m {w.m_approx}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .witness import Witness, verify_witness

    w = Witness.from_json(load_json(args.witness))
    failures = verify_witness(w, args.tol)
    if failures:
        for f in failures:
            print(f"FAIL {f}")
        return EXIT_DEPENDENT
    print(f"OK witness for ({w.i},{w.j}|{sorted(w.K)}) passes all checks")
    return EXIT_OK


def cmd_simulate(args) -> int:
    from .sde_sim import DriftSpec, SimConfig, simulate

    try:
        spec = DriftSpec.from_json(load_json(args.spec))
        cfg_obj = load_json(args.config) if args.config else {}
        if args.seed is not None:
            cfg_obj["seed"] = args.seed
        cfg = SimConfig.from_json(cfg_obj)
    except (KeyError, TypeError) as exc:
        raise InputError(f"bad spec or config: {exc!r}") from exc
    X = simulate(spec, cfg)
    if args.out:
        write_samples(X, args.out)
    else:
        sys.stdout.write(matrix_to_csv(X))
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .harness import equivalence_harness
    from .minor_checks import run_all

    ok = True
    t0 = time.perf_counter()
    for rep in run_all():
        print(rep, flush=True)
        ok &= rep.ok
    for n in range(2, args.max_n + 1):
        rep = equivalence_harness(n, seed=args.seed, tol=args.tol)
        print(rep, flush=True)
        for f in rep.failures[:10]:
            print(f"  {f}")
        ok &= rep.ok
    print(f"{'PASS' if ok else 'FAIL'} selftest in {time.perf_counter() - t0:.1f}s")
    return EXIT_OK if ok else EXIT_DEPENDENT


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="trekci", description=(
        "Conditional independence in stationary diffusions via trek separation, "
        "with Ornstein-Uhlenbeck witnesses for dependence."))
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def triple(sp):
        sp.add_argument("--graph", required=True, help="graph JSON file")
        sp.add_argument("--i", type=int, required=True)
        sp.add_argument("--j", type=int, required=True)
        sp.add_argument("--K", default="", help='conditioning set, e.g. "1,3" (default empty)')

    sp = sub.add_parser("trek-graph", help="write the trek graph")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_trek_graph)

    sp = sub.add_parser("ci", help="decide i _||_ j | K; exit 0 if implied, 1 if not")
    triple(sp)
    sp.set_defaults(func=cmd_ci)

    sp = sub.add_parser("enumerate", help="all elementary statements and verdicts")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--max-n", type=int, default=DEFAULT_MAX_N)
    sp.add_argument("--implied-only", action="store_true")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("witness", help="build a dependence witness bundle")
    triple(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_witness)

    sp = sub.add_parser("verify", help="recheck a witness bundle")
    sp.add_argument("--witness", required=True)
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("simulate", help="Euler-Maruyama samples as CSV")
    sp.add_argument("--spec", required=True, help="drift JSON")
    sp.add_argument("--config", help="simulation config JSON")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("selftest", help="degree-formula suites and the exhaustive harness")
    sp.add_argument("--max-n", type=int, default=4)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ArithmeticError) as exc:
        # FormatError, InputError, invalid drifts and diverging simulations
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
