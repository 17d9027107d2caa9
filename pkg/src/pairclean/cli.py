"""Command-line entry point: ``pairclean solve|audit|oracle|minimize``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import audit
from .clearing import Schedule, run_pair_cleaning
from .errors import PaircleanError
from .formula import assignment_to_dimacs, read_dimacs, write_dimacs
from .merged import MergedStructure
from .oracle import DEFAULT_CAP, brute_force
from .solver import ENGINES, decide, enumerate_models, extract
from .structure import build_structure

EXIT_SAT = 10
EXIT_UNSAT = 20
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_ANOMALY = 30

CONFLUENCE_SCHEDULES = ("naive", "worklist", "randomized:1", "randomized:2", "randomized:3")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pairclean", description="Pair cleaning for uniform k-CNF formulas.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="decide a DIMACS file by clearing")
    s.add_argument("path")
    s.add_argument("--extract", action="store_true", help="also extract and print a verified model")
    s.add_argument("--enumerate", type=int, metavar="N", help="print up to N models")
    s.add_argument("--engine", choices=ENGINES, default="merged")
    s.add_argument("--stats", action="store_true", help="print clearing counters as a comment line")
    s.add_argument("--trace", action="store_true", help="print one comment line per pair clearing")
    s.add_argument("--check-confluence", action="store_true",
                   help="compare the fixpoints of five schedules")

    a = sub.add_parser("audit", help="differential audit on random instances")
    a.add_argument("--m", type=int, default=10)
    a.add_argument("--n", type=int, help="clauses per instance (default: ratio * m)")
    a.add_argument("--k", type=int, default=3)
    a.add_argument("--count", type=int, default=100)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--ratio", type=float, default=4.2)
    a.add_argument("--planted", action="store_true")
    a.add_argument("--out", default="audit-out")
    a.add_argument("--engine", choices=ENGINES, default="merged")
    a.add_argument("--timing", action="store_true", help="fill the wall_time_ms column")
    a.add_argument("--no-extract", action="store_true")

    o = sub.add_parser("oracle", help="exact answer by exhaustive search")
    o.add_argument("path")
    o.add_argument("--enumerate", action="store_true")
    o.add_argument("--cap", type=int, default=DEFAULT_CAP)

    mz = sub.add_parser("minimize", help="shrink a disagreeing instance to a 1-minimal one")
    mz.add_argument("path")
    mz.add_argument("--out", required=True)
    mz.add_argument("--engine", choices=ENGINES, default="merged")
    return p


def _fixpoint_signature(f, engine: str, sched: Schedule):
    if engine == "merged":
        ms = MergedStructure(f)
        st = ms.initial_state(sched)
        st.propagate()
        if st.is_empty():
            return "empty"
        return st.alive.tobytes()
    rs, sv = build_structure(f)
    sv, _ = run_pair_cleaning(rs, sv, sched)
    if sv.is_empty():
        return "empty"
    return tuple(v.rows for v in sv.per_combination)


def cmd_solve(args, out, decide_fn=None) -> int:
    f = read_dimacs(args.path)
    trace_lines = []
    if args.trace and args.engine != "merged":
        rs, sv = build_structure(f)
        run_pair_cleaning(rs, sv, Schedule(args.engine), trace=trace_lines.append)
    if decide_fn is not None:
        verdict = decide_fn(f)
    else:
        verdict = decide(f, args.engine)
    for line in trace_lines:
        print(f"c trace {line}", file=out)
    if args.trace and args.engine == "merged":
        print("c trace per-pair lines come from the literal engines; use --engine naive or worklist", file=out)
    code = EXIT_SAT if verdict.sat else EXIT_UNSAT
    print("s SATISFIABLE" if verdict.sat else "s UNSATISFIABLE", file=out)
    stats = {"engine": args.engine, "claim": verdict.kind.value, "n_t": verdict.n_t,
             "combinations": verdict.n_combinations, **verdict.stats.to_dict()}
    if args.check_confluence:
        sigs = {name: _fixpoint_signature(f, args.engine, Schedule.parse(name)) for name in CONFLUENCE_SCHEDULES}
        same = len(set(sigs.values())) == 1
        print(f"c confluence {'ok' if same else 'FAILED'} over {', '.join(CONFLUENCE_SCHEDULES)}", file=out)
        if not same:
            code = EXIT_ANOMALY
    if args.extract and verdict.sat:
        ex = extract(f, args.engine)
        stats["backtracks"] = ex.backtracks
        if ex.kind == "model":
            print(assignment_to_dimacs(ex.model), file=out)
        else:
            print(f"c anomaly: {ex.note or ex.kind}", file=out)
            print(f"c anomaly trace {json.dumps(ex.to_dict(), sort_keys=True)}", file=out)
            code = EXIT_ANOMALY
    if args.enumerate is not None:
        if args.enumerate < 1:
            raise ValueError("--enumerate needs N >= 1")
        models = enumerate_models(f, args.enumerate, args.engine)
        for a in models:
            print(assignment_to_dimacs(a), file=out)
        print(f"c models {len(models)}", file=out)
        if bool(models) != verdict.sat:
            print("c anomaly: enumeration disagrees with the claim", file=out)
            code = EXIT_ANOMALY
    if args.stats:
        print(f"c stats {json.dumps(stats, sort_keys=True)}", file=out)
    return code


def _stamp(args, n: int) -> str:
    stamp = f"audit_m{args.m}_n{n}_k{args.k}_count{args.count}_seed{args.seed}"
    if args.planted:
        stamp += "_planted"
    if args.engine != "merged":
        stamp += f"_{args.engine}"
    return stamp


def cmd_audit(args, out, decide_fn=None) -> int:
    n = args.n if args.n is not None else round(args.ratio * args.m)
    if args.count < 0:
        raise ValueError("--count must be non-negative")
    specs = audit.make_specs(args.m, n, args.k, args.count, args.seed, args.planted)
    records = audit.run_audit(specs, args.engine, decide_fn, not args.no_extract)
    run_dir = Path(args.out) / _stamp(args, n)
    paths = audit.export_report(records, run_dir, args.timing, decide_fn)
    summary = audit.summarize(records)
    print(f"c report {paths['csv']}", file=out)
    print(f"c report {paths['json']}", file=out)
    for art in paths["artifacts"]:
        print(f"c counterexample {art['original']}", file=out)
        print(f"c counterexample {art['minimized']}", file=out)
    print(
        f"c instances {summary['instances']} decided {summary['decided']} agree {summary['agree']} "
        f"false-sat {summary['false_sat']} false-unsat {summary['false_unsat']} skipped {summary['skipped']}",
        file=out,
    )
    print(f"c agreement rate {summary['agreement_rate']:.4f}", file=out)
    print(f"c max passes {summary['max_passes']} max passes/bound {summary['max_pass_bound_ratio']:.3g} "
          f"bounds ok {int(summary['bounds_ok'])}", file=out)
    print(f"c max backtracks {summary['max_backtracks']} over {summary['extractions']} extractions", file=out)
    if summary["false_unsat"]:
        return EXIT_ERROR
    if summary["false_sat"]:
        return EXIT_ANOMALY
    return EXIT_OK


def cmd_oracle(args, out) -> int:
    f = read_dimacs(args.path)
    res = brute_force(f, args.enumerate, args.cap)
    print("s SATISFIABLE" if res.satisfiable else "s UNSATISFIABLE", file=out)
    if args.enumerate:
        for a in res.models:
            print(assignment_to_dimacs(a), file=out)
        print(f"c models {len(res.models)}", file=out)
    print(f"c assignments checked {res.assignments_checked}", file=out)
    return EXIT_SAT if res.satisfiable else EXIT_UNSAT


def cmd_minimize(args, out, decide_fn=None) -> int:
    f = read_dimacs(args.path)
    if decide_fn is None:
        engine = args.engine

        def decide_fn(g):
            return decide(g, engine)

    pred = audit.disagreement_predicate(decide_fn)
    if not pred(f):
        print("no disagreement between the clearing claim and the oracle", file=sys.stderr)
        return EXIT_ERROR
    res = audit.minimize(f, pred)
    Path(args.out).write_text(write_dimacs(res.minimized, ["1-minimal disagreeing instance"]), encoding="utf-8")
    print(f"c before m={f.m} n={f.n}", file=out)
    print(f"c after m={res.minimized.m} n={res.minimized.n} steps={res.steps}", file=out)
    print(f"c wrote {args.out}", file=out)
    return EXIT_OK


def main(argv=None, decide_fn=None, out=None) -> int:
    """Run the CLI; ``decide_fn`` replaces the clearing decision (for tests)."""
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        if args.command == "solve":
            return cmd_solve(args, out, decide_fn)
        if args.command == "audit":
            return cmd_audit(args, out, decide_fn)
        if args.command == "oracle":
            return cmd_oracle(args, out)
        return cmd_minimize(args, out, decide_fn)
    except (PaircleanError, ValueError, OSError) as exc:
        print(f"pairclean: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
