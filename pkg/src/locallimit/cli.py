"""Command-line interface.

Exit codes: 0 success, 1 failed check or other error, 2 unreadable input,
3 scale N above ``--max-N``.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from .census import WORKERS_ENV, ball_census, certified_radius, default_workers
from .exceptions import LocalLimitError, MaxNExceeded, ParseError
from .measures import (
    load_table,
    marginals_atom,
    marginals_regular,
    marginals_ugw,
    named_tree,
    parse_degree_dist,
    save_table,
)
from .synthesizer import DEFAULT_MAX_N, DEFAULT_SEED, MODES, read_edge_list, synthesize, synthesize_sequence, write_edge_list
from .validator import check

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_MAX_N = 0, 1, 2, 3


@dataclass
class RunConfig:
    command: str
    d: int | None = None
    r: int | None = None
    depth: int | None = None
    epsilon: Fraction | None = None
    seed: int = DEFAULT_SEED
    mode: str = "quotient"
    paths: dict[str, str] = field(default_factory=dict)
    max_N: int = DEFAULT_MAX_N
    max_denominator: int | None = None
    max_core: int | None = None
    workers: int = 1

    def __post_init__(self) -> None:
        for name in ("max_N", "max_denominator", "max_core", "workers"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be positive")
        if self.epsilon is not None and not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        paths = {k: getattr(args, k) for k in ("table", "graph", "out", "out_dir", "report") if getattr(args, k, None)}
        return cls(
            command=args.command,
            d=getattr(args, "d", None),
            r=getattr(args, "r", None),
            depth=getattr(args, "depth", None),
            epsilon=getattr(args, "epsilon", None),
            seed=getattr(args, "seed", DEFAULT_SEED),
            mode=getattr(args, "mode", "quotient"),
            paths=paths,
            max_N=getattr(args, "max_N", DEFAULT_MAX_N),
            max_denominator=getattr(args, "max_denominator", None),
            max_core=getattr(args, "max_core", None),
            workers=getattr(args, "workers", None) or 1,
        )


def _seed(text: str) -> int:
    if text == "random":
        return random.SystemRandom().getrandbits(64)
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer or 'random', got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def _epsilon(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError("epsilon must lie in (0, 1)")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _workers(args) -> int:
    return args.workers if args.workers is not None else default_workers()


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_marginals(args) -> int:
    if args.kind == "regular":
        if args.d is None:
            raise LocalLimitError("regular needs --d")
        table = marginals_regular(args.d, args.depth)
    elif args.kind == "ugw":
        if args.deg is None:
            raise LocalLimitError("ugw needs --deg")
        law = parse_degree_dist(args.deg)
        d = args.d if args.d is not None else max(law)
        table = marginals_ugw(law, d, args.depth)
    else:
        n, edges = named_tree(args.tree)
        table = marginals_atom(n, edges, args.depth, args.d)
    report = check(table)
    if not report.passed:
        sys.stderr.write(report.to_text())
        return EXIT_FAIL
    if args.out and args.out != "-":
        save_table(table, args.out)
        print(f"wrote {args.out}\td={table.d}\tdepth={table.depth}\tdigest={table.digest}")
    else:
        sys.stdout.write(table.to_bytes().decode())
    return EXIT_OK


def cmd_validate(args) -> int:
    table = load_table(args.table, checked=False)
    report = check(table, args.r_max, args.tolerance)
    if args.json:
        doc = {
            "passed": report.passed,
            "r_max": report.r_max,
            "tolerance": str(report.tolerance),
            "certified_radius": report.certified_radius,
            "violations": [
                {"equation": v.equation, "radius": v.radius, "witness": v.witness, "lhs": str(v.lhs), "rhs": str(v.rhs)}
                for v in report.violations
            ],
        }
        print(json.dumps(doc, indent=1))
    else:
        sys.stdout.write(report.to_text())
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_synthesize(args) -> int:
    table = load_table(args.table)
    t0 = time.perf_counter()
    graph, report = synthesize(
        table,
        args.r,
        args.epsilon,
        args.mode,
        args.seed,
        n_labels=args.n_labels,
        min_vertices=args.min_vertices,
        max_N=args.max_N,
        max_denominator=args.max_denominator,
    )
    write_edge_list(graph, args.out)
    text = report.to_text() + f"seconds\t{time.perf_counter() - t0:.3f}\n"
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    if args.json:
        print(json.dumps(report.to_dict(), indent=1))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _census_args(args, table=None):
    graph = read_edge_list(args.graph)
    rep = ball_census(graph, args.r, args.d, table=table, workers=_workers(args), max_core=args.max_core)
    return graph, rep


def cmd_census(args) -> int:
    table = load_table(args.table) if args.table else None
    _, rep = _census_args(args, table)
    if args.json:
        print(json.dumps(rep.to_dict(), indent=1))
    else:
        sys.stdout.write(rep.to_text())
    return EXIT_OK


def cmd_verify(args) -> int:
    table = load_table(args.table)
    graph, rep = _census_args(args, table)
    eps = args.epsilon
    if eps is None:
        eps = Fraction(graph.provenance["epsilon"]) if "epsilon" in graph.provenance else Fraction(1, 20)
    ok = rep.tv_distance <= eps
    lines = [
        f"status\t{'PASS' if ok else 'FAIL'}",
        f"radius\t{rep.radius}",
        f"epsilon\t{eps}",
        f"tv_distance\t{rep.tv_distance}",
        f"tv_distance_float\t{float(rep.tv_distance):.6g}",
        f"max_deviation\t{rep.max_deviation}",
        f"tree_ball_fraction\t{rep.tree_ball_fraction}",
        f"vertices\t{rep.total}",
    ]
    if args.json:
        print(json.dumps({"passed": ok, "epsilon": str(eps), **rep.to_dict()}, indent=1))
    else:
        print("\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sequence(args) -> int:
    table = load_table(args.table)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    print("k\tepsilon\tvertices\tedges\ttv\ttree_ball_fraction\tcertified_radius\tfile")
    ok = True
    for k, eps, graph, _report in synthesize_sequence(table, args.K, args.seed, max_N=args.max_N):
        path = out_dir / f"G_{k}.txt"
        write_edge_list(graph, path)
        rep = ball_census(graph, k, table=table, workers=_workers(args), with_girth=False)
        cert = certified_radius(rep, table, eps)
        ok &= rep.tv_distance <= eps
        print(f"{k}\t{eps}\t{graph.n}\t{graph.num_edges}\t{float(rep.tv_distance):.6g}\t"
              f"{float(rep.tree_ball_fraction):.6f}\t{cert}\t{path}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    results = run_selftest(quick=args.quick)
    for name, passed, detail in results:
        print(f"{'PASS' if passed else 'FAIL'}\t{name}\t{detail}")
    return EXIT_OK if all(p for _, p, _ in results) else EXIT_FAIL


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def _add_census_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("-r", type=int, required=True, help="ball radius")
    p.add_argument("--d", type=_positive, default=None, help="degree bound (default: from table or graph header)")
    p.add_argument("--max-core", type=_positive, default=32, help="largest cyclic ball core to canonicalize")
    p.add_argument("--workers", type=_positive, default=None,
                   help=f"census processes (default: ${WORKERS_ENV} or available CPUs)")
    p.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="locallimit", description="Finite graphs with prescribed ball statistics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("marginals", help="write a marginal table file")
    p.add_argument("kind", choices=["regular", "ugw", "atom"], help="measure family")
    p.add_argument("--d", type=_positive, default=None, help="degree bound")
    p.add_argument("--depth", type=int, required=True, help="largest ball radius in the table")
    p.add_argument("--deg", default=None, help="root degree law for ugw, e.g. 1:1/2,3:1/2")
    p.add_argument("--tree", default="K2", help="tree for atom: K1, K2, pathN, starN, binaryN or 0-1,1-2")
    p.add_argument("-o", "--out", default=None, help="output path (default: stdout)")
    p.set_defaults(func=cmd_marginals)

    p = sub.add_parser("validate", help="check a table for involution invariance")
    p.add_argument("table", help="table file")
    p.add_argument("--r-max", type=int, default=None, help="largest radius to check (default: depth - 1)")
    p.add_argument("--tolerance", type=Fraction, default=Fraction(0), help="absolute tolerance (default 0)")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("synthesize", help="build a graph from a table")
    p.add_argument("table", help="table file (depth >= r + 2)")
    p.add_argument("-r", type=int, required=True, help="target radius")
    p.add_argument("--epsilon", type=_epsilon, default=Fraction(1, 20), help="TV budget in (0,1) (default 1/20)")
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help=f"64-bit seed or 'random' (default {DEFAULT_SEED})")
    p.add_argument("--mode", choices=MODES, default="quotient", help="quotient (default) or faithful labeled mode")
    p.add_argument("--n-labels", type=_positive, default=None, help="label count (faithful mode) or vertex floor")
    p.add_argument("--min-vertices", type=_positive, default=None, help="lower bound on output size (quotient mode)")
    p.add_argument("--max-N", type=_positive, default=DEFAULT_MAX_N, help="abort when the scale N exceeds this")
    p.add_argument("--max-denominator", type=_positive, default=None, help="denominator bound for weight rounding")
    p.add_argument("-o", "--out", required=True, help="edge-list output path")
    p.add_argument("--report", default=None, help="also write the synthesis report here")
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("census", help="ball census of an edge-list graph")
    p.add_argument("graph", help="edge-list file")
    p.add_argument("--table", default=None, help="reference table for TV distance")
    _add_census_flags(p)
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("verify", help="exit 0 iff the graph's census is within epsilon of the table")
    p.add_argument("graph", help="edge-list file")
    p.add_argument("table", help="table file")
    p.add_argument("--epsilon", type=_epsilon, default=None, help="TV budget (default: from the graph header)")
    _add_census_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sequence", help="graphs G_k at radius k and tolerance 2^-k")
    p.add_argument("table", help="table file (depth >= K + 2)")
    p.add_argument("-K", type=_positive, required=True, help="number of graphs")
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="64-bit seed or 'random'")
    p.add_argument("--max-N", type=_positive, default=DEFAULT_MAX_N, help="abort when the scale N exceeds this")
    p.add_argument("--workers", type=_positive, default=None, help="census processes")
    p.add_argument("--out-dir", default=".", help="directory for G_k.txt files")
    p.set_defaults(func=cmd_sequence)

    p = sub.add_parser("selftest", help="check the labeled-measure identities and module invariants")
    p.add_argument("--quick", action="store_true", help="skip the slower d = 3 identity instance")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    func: Callable = args.func
    try:
        args.config = RunConfig.from_args(args)
    except ValueError as exc:
        parser.error(str(exc))
    try:
        return func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except MaxNExceeded as exc:
        print(f"error: {exc}\nrequired_N\t{exc.required}", file=sys.stderr)
        return EXIT_MAX_N
    except (LocalLimitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
