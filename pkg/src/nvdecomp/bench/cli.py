"""Command line entry point.

    nvdecomp bench queens [--n K --nvalue N] [--decomp NAMES] [--full]
    nvdecomp bench random [--class A..E|custom] [--count C] [--seed S] [--decomp NAMES]
    nvdecomp solve --file PATH [--decomp NAME]
    nvdecomp gen queens|random ... --out PATH

Exit status is 0 when the run completes (timeouts included) and 1 on any
parse or configuration error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from typing import List, Optional, Sequence

from ..search import Backend, SearchConfig, Status, solve
from .generators import CLASSES, gen_queens, gen_random_csp, random_suite
from .instances import DECOMPOSITIONS, Instance, ParseError, build_model, check_solution, read_instance, write_instance
from .runner import run_bench

# (n, N) pairs run by default and with --full
DESK_QUEENS = [(5, 2), (5, 3), (6, 2), (6, 3), (7, 4)]
FULL_QUEENS = [(5, 3), (6, 3), (7, 4), (8, 5)]
BENCH_DECOMPS = ("occs", "pyramid-bc", "pyramid-rc")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _decomps(text: str) -> List[str]:
    names = list(BENCH_DECOMPS) if text == "all" else [s.strip() for s in text.split(",") if s.strip()]
    bad = [n for n in names if n not in DECOMPOSITIONS]
    if bad or not names:
        raise UsageError(f"unknown decomposition {bad[0] if bad else text!r}; choose from {', '.join(DECOMPOSITIONS)}")
    return names


def _config(args, default_timeout: float) -> SearchConfig:
    timeout = args.timeout if args.timeout is not None else default_timeout
    if timeout <= 0:
        raise UsageError("--timeout must be positive")
    return SearchConfig(timeout=timeout, backend=args.backend)


def _parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--timeout", type=float, help="seconds per instance")
    common.add_argument("--backend", choices=[b.value for b in Backend], default=Backend.AUTO.value)

    report = _Parser(add_help=False)
    report.add_argument("--decomp", default="pyramid-bc", help="comma separated names, or 'all'")
    report.add_argument("--csv", metavar="PATH", help="also write rows as CSV")
    report.add_argument("--workers", type=int, default=1)
    report.add_argument("--full", action="store_true", help="full-scale experiment shapes")

    p = _Parser(prog="nvdecomp", description="NValue decompositions: benchmarks and solving")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    bench = sub.add_parser("bench", help="run a benchmark suite")
    bsub = bench.add_subparsers(dest="suite", required=True, parser_class=_Parser)
    q = bsub.add_parser("queens", parents=[common, report], help="dominating sets of the queen's graph")
    q.add_argument("--n", type=int)
    q.add_argument("--nvalue", type=int)
    r = bsub.add_parser("random", parents=[common, report], help="random binary CSPs with AtMostNValue")
    r.add_argument("--class", dest="cls", default=None, help="A..E or custom")
    r.add_argument("--count", type=int)
    r.add_argument("--seed", type=int, default=1)
    for name in ("n", "d", "m", "t", "nvalue"):
        r.add_argument(f"--{name}", type=int, help="custom class parameter")

    s = sub.add_parser("solve", parents=[common], help="solve one NVP file")
    s.add_argument("--file", required=True)
    s.add_argument("--decomp", default="pyramid-bc")
    s.add_argument("--trace", action="store_true", help="log every domain change (Python backend)")

    g = sub.add_parser("gen", help="write an instance in NVP format")
    gsub = g.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    gq = gsub.add_parser("queens")
    gq.add_argument("--n", type=int, required=True)
    gq.add_argument("--nvalue", type=int, required=True)
    gq.add_argument("--out", required=True)
    gr = gsub.add_parser("random")
    gr.add_argument("--class", dest="cls", default="custom")
    gr.add_argument("--seed", type=int, default=1)
    for name in ("n", "d", "m", "t", "nvalue"):
        gr.add_argument(f"--{name}", type=int)
    gr.add_argument("--out", required=True)
    return p


def _random_params(args):
    if args.cls is None or args.cls.lower() == "custom":
        vals = [getattr(args, k) for k in ("n", "d", "m", "t", "nvalue")]
        if None in vals:
            raise UsageError("a custom class needs --n --d --m --t --nvalue")
        return vals
    cls = args.cls.upper()
    if cls not in CLASSES:
        raise UsageError(f"unknown class {args.cls!r}; choose from {', '.join(CLASSES)} or custom")
    c = CLASSES[cls]
    return [c.n, c.d, c.m, c.t, c.nvalue]


def _bench_suite(args) -> List[Instance]:
    if args.suite == "queens":
        if args.n is not None:
            nv = args.nvalue if args.nvalue is not None else math.ceil(args.n / 2)
            pairs = [(args.n, nv)]
        else:
            pairs = FULL_QUEENS if args.full else DESK_QUEENS
        try:
            return [gen_queens(n, nv) for n, nv in pairs]
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    count = args.count if args.count is not None else (500 if args.full else 20)
    if count < 0:
        raise UsageError("--count must be non-negative")
    if args.cls is None:
        classes = list(CLASSES) if args.full else ["E"]
        return [inst for c in classes for inst in random_suite(c, count, args.seed)]
    if args.cls.upper() in CLASSES:
        return random_suite(args.cls.upper(), count, args.seed)
    params = _random_params(args)
    try:
        return [gen_random_csp(*params, seed=args.seed + k) for k in range(count)]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _cmd_bench(args) -> int:
    decomps = _decomps(args.decomp)
    if args.workers < 1:
        raise UsageError("--workers must be at least 1")
    suite = _bench_suite(args)
    cfg = _config(args, 600.0 if args.full else 60.0)
    report = run_bench(suite, decomps, cfg, workers=args.workers)
    print(report.table())
    if args.csv:
        report.write_csv(args.csv)
    return 0


def _cmd_solve(args) -> int:
    (decomp,) = _decomps(args.decomp)
    try:
        inst = read_instance(args.file)
    except OSError as exc:
        raise UsageError(str(exc)) from None
    cfg = _config(args, 60.0)
    if args.trace:
        logging.getLogger("nvdecomp").setLevel(logging.DEBUG)
        cfg.backend = Backend.PYTHON
    m, xs, _ = build_model(inst, decomp, trace=args.trace)
    res = solve(m, xs, cfg)
    st = res.stats
    print(f"status      {res.status.value}")
    print(f"nodes       {st.nodes}")
    print(f"fails       {st.fails}")
    print(f"backtracks  {st.backtracks}")
    print(f"time        {st.wall_time:.3f}")
    if res.status is Status.SAT:
        values = [res.solution[x] for x in xs]
        print(f"verified    {'yes' if check_solution(inst, values) else 'NO'}")
        print("solution    " + " ".join(map(str, values)))
    return 0


def _cmd_gen(args) -> int:
    try:
        if args.kind == "queens":
            inst = gen_queens(args.n, args.nvalue)
        else:
            inst = gen_random_csp(*_random_params(args), seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    write_instance(inst, args.out)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "solve":
            return _cmd_solve(args)
        return _cmd_gen(args)
    except (UsageError, ParseError) as exc:
        print(f"nvdecomp: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
