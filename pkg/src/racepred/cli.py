"""Command-line front end.

Subcommands: analyze (race detection), validate (well-formedness report),
generate (fixtures, gadget, random traces), oracle (brute-force relations
on small traces).  analyze exits 0 when no races were found, 1 when some
were, 2 on errors; everything written to stdout is deterministic for a
given input and configuration (timings go to stderr or the metrics file).
"""

from __future__ import annotations

import argparse
import sys
import time

from . import oracle as oracle_mod
from . import tracegen
from .hb_engine import HbEngine
from .race_reporter import (AccessClocks, render_flags, resolve_pairs,
                            run_detector, summary_lines)
from .race_reporter import Flag, check_access
from .trace_model import (ParseError, Trace, TraceBuilder, iter_parse,
                          load_trace, parse_trace, validate)
from .vclock import render
from .wcp_engine import EngineError, WcpEngine

_ENGINES = {"wcp": WcpEngine, "hb": HbEngine}


def _open_input(path: str):
    if path == "-":
        return sys.stdin
    return open(path, "r", encoding="utf-8")


def _detectors(name: str) -> list[str]:
    return ["wcp", "hb"] if name == "both" else [name]


def _analyze(args: argparse.Namespace, out) -> int:
    detectors = _detectors(args.detector)
    buffered = args.pairs or args.gc_history
    if args.gc_history and args.input == "-":
        print("--gc-history needs a re-scannable input file", file=sys.stderr)
        return 2

    t0 = time.perf_counter()
    trace: Trace | None = None
    engines = {}
    clocks = {}
    flags = {}

    def dump_hook(det):
        if not args.dump_timestamps:
            return None
        if det == "wcp":
            def dump(e, c, eng):
                t = e.tid
                out.write(f"{e.idx}|{builder.thread_names[t]}|C={render(c)}"
                          f"|P={render(eng.pred[t])}|H={render(eng.hbt[t])}\n")
        else:
            def dump(e, c, eng):
                out.write(f"HB|{e.idx}|{builder.thread_names[e.tid]}|C={render(c)}\n")
        return dump

    try:
        if buffered:
            trace = load_trace(args.input) if args.input != "-" else parse_trace(sys.stdin)
            builder = trace
            for det in detectors:
                eng = _ENGINES[det](gc_history=args.gc_history)
                if args.gc_history:
                    last = {}
                    for e in trace.events:
                        last[e.tid] = e.idx
                    eng.preregister(trace.n_threads, last)
                clocks[det] = AccessClocks()
                flags[det] = run_detector(trace.events, eng, clocks[det], dump_hook(det))
                engines[det] = eng
        else:
            # streaming: one pass, events are not retained
            builder = TraceBuilder()
            hooks = {}
            for det in detectors:
                engines[det] = _ENGINES[det]()
                clocks[det] = AccessClocks()
                flags[det] = []
                hooks[det] = dump_hook(det)
            with _open_input(args.input) as f:
                for e in iter_parse(f, builder):
                    for det in detectors:
                        c = engines[det].process(e)
                        if e.kind <= 1 and check_access(clocks[det], e.kind, e.op, c):
                            flags[det].append(Flag(e.idx, e.op, e.kind, e.tid, e.loc_or_default()))
                        if hooks[det] is not None:
                            hooks[det](e, c, engines[det])
            trace = builder.build()
    except (ParseError, EngineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    elapsed = time.perf_counter() - t0

    any_race = False
    metrics_lines: list[str] = []
    if args.pairs and "wcp" in detectors:
        out.write("# note|wcp|only the first reported pair carries the soundness "
                  "guarantee; an unordered pair can also witness a predictable deadlock\n")
    for det in detectors:
        det_flags = flags[det]
        pair_count = None
        if args.pairs:
            pairs, notes = resolve_pairs(trace, det_flags, _ENGINES[det],
                                         pair_budget=args.pair_budget)
            for note in notes:
                out.write(f"# note|{det}|{note}\n")
            for p in pairs:
                out.write(p.render(det) + "\n")
            pair_count = len(pairs)
            any_race = any_race or bool(pairs)
        else:
            for line in render_flags(trace, det_flags, det):
                out.write(line + "\n")
            any_race = any_race or bool(det_flags)
        counts = (trace.n_events, trace.n_threads, trace.n_locks, trace.n_vars)
        block = summary_lines(det, counts, len(det_flags), engines[det], pair_count)
        for line in block:
            out.write(line + "\n")
        metrics_lines += block
    print(f"time_s={elapsed:.3f}", file=sys.stderr)

    if args.metrics:
        with open(args.metrics, "w", encoding="utf-8") as mf:
            for line in metrics_lines:
                mf.write(line + "\n")
            mf.write(f"time_s={elapsed:.3f}\n")
    return 1 if any_race else 0


def _validate(args: argparse.Namespace, out) -> int:
    try:
        with _open_input(args.input) as f:
            from .trace_model import parse_trace
            trace = parse_trace(f)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = validate(trace)
    for v in report.violations:
        out.write(v.render() + "\n")
    out.write(f"ok={'true' if report.ok else 'false'}\n")
    return 0 if report.ok else 2


def _generate(args: argparse.Namespace, out) -> int:
    chosen = sum(x is not None for x in (args.fixture, args.bits)) + (1 if args.random else 0)
    if chosen != 1:
        print("pick exactly one of --fixture, --bits, --random", file=sys.stderr)
        return 2
    try:
        if args.fixture:
            trace = tracegen.fixture(args.fixture)
        elif args.bits:
            u, _, v = args.bits.partition(",")
            trace = tracegen.gen_equality_trace(u, v)
        else:
            params = tracegen.GenParams(threads=args.threads, locks=args.locks,
                                        vars=args.vars, events=args.events,
                                        p_lock=args.p_lock, p_write=args.p_write,
                                        max_nesting=args.max_nesting, seed=args.seed)
            trace = tracegen.gen_random(params, close_sections=not args.dangling)
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = trace.serialize()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        out.write(text)
    return 0


def _oracle(args: argparse.Namespace, out) -> int:
    try:
        with _open_input(args.input) as f:
            from .trace_model import parse_trace
            trace = parse_trace(f)
        hb = oracle_mod.hb_closure(trace, args.bound)
        wprec = oracle_mod.wcp_prec_closure(trace, args.bound)
        cprec = oracle_mod.cp_prec_closure(trace, args.bound)
    except (ParseError, oracle_mod.BoundExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    wle = oracle_mod._as_partial_order(trace, wprec, oracle_mod.WCP_LE)
    cle = oracle_mod._as_partial_order(trace, cprec, oracle_mod.CP_LE)
    for rel in (hb, cprec, wprec):
        for line in rel.dump_lines():
            out.write(line + "\n")
    any_wcp_race = False
    for kind, rel in (("hb", hb), ("cp", cle), ("wcp", wle)):
        for i, j in sorted(oracle_mod.races_of(trace, rel)):
            out.write(f"RACEPAIR|{kind}|{i}|{j}|{trace.loc(i)}|{trace.loc(j)}\n")
            if kind == "wcp":
                any_wcp_race = True
    return 1 if any_wcp_race else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="racepred",
                                 description="Predictive data-race detection over logged traces")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run race detection over a trace")
    a.add_argument("input", help="trace file in STD format, or - for stdin")
    a.add_argument("--detector", choices=["wcp", "hb", "both"], default="wcp")
    a.add_argument("--pairs", action="store_true",
                   help="second pass: resolve full race pairs (buffers the trace)")
    a.add_argument("--pair-budget", type=int, default=10_000_000)
    a.add_argument("--dump-timestamps", action="store_true")
    a.add_argument("--gc-history", action="store_true",
                   help="trim drained section logs (needs a re-scannable file)")
    a.add_argument("--metrics", metavar="FILE", default=None)
    a.add_argument("--format", choices=["std"], default="std")

    v = sub.add_parser("validate", help="check lock semantics and nesting")
    v.add_argument("input")

    g = sub.add_parser("generate", help="emit a trace in STD format")
    g.add_argument("--fixture", choices=list(tracegen.FIXTURE_NAMES), default=None)
    g.add_argument("--bits", metavar="U,V", default=None,
                   help="equality gadget for bit strings U and V")
    g.add_argument("--random", action="store_true")
    g.add_argument("--threads", type=int, default=3)
    g.add_argument("--locks", type=int, default=2)
    g.add_argument("--vars", type=int, default=3)
    g.add_argument("--events", type=int, default=40)
    g.add_argument("--p-lock", type=float, default=0.3)
    g.add_argument("--p-write", type=float, default=0.5)
    g.add_argument("--max-nesting", type=int, default=2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--dangling", action="store_true",
                   help="leave sections open at thread end (robustness tests)")
    g.add_argument("-o", "--output", default=None)

    o = sub.add_parser("oracle", help="brute-force HB/CP/WCP relations (small traces)")
    o.add_argument("input")
    o.add_argument("--bound", type=int, default=oracle_mod.DEFAULT_BOUND)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = sys.stdout
    if args.command == "analyze":
        return _analyze(args, out)
    if args.command == "validate":
        return _validate(args, out)
    if args.command == "generate":
        return _generate(args, out)
    return _oracle(args, out)


if __name__ == "__main__":
    sys.exit(main())
