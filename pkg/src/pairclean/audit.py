"""Differential audit of cleaning verdicts against exact search.

Random instances are generated from seeded specs, decided by clearing,
checked by the oracle and classified.  Disagreements are shrunk to 1-minimal
DIMACS counterexamples and archived with the report.
"""

from __future__ import annotations

import csv
import io
import json
import math
import random
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .clearing import ClearStats
from .errors import InstanceTooWide
from .formula import Clause, Formula, Literal, parse_dimacs, write_dimacs
from .oracle import DEFAULT_CAP, brute_force, dpll
from .solver import Claim, Verdict, decide, extract, initial_state

CSV_COLUMNS = [
    "seed", "m", "n", "k", "n_t", "claim", "truth", "classification", "passes",
    "pair_clearings", "rows_removed", "backtracks", "bound_ok", "wall_time_ms",
]

AGREE = "agree"
FALSE_SAT = "false-sat"
FALSE_UNSAT = "false-unsat"
SKIPPED = "skipped"


@dataclass(frozen=True)
class GenSpec:
    m: int
    n: int
    k: int
    seed: int
    planted: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 2 <= self.k <= min(self.m, 8):
            raise ValueError(f"k must lie in [2, min(m, 8)], got k={self.k} with m={self.m}")


def _hidden(rng: random.Random, m: int) -> tuple[int, ...]:
    return tuple(rng.randrange(2) for _ in range(m))


def hidden_assignment(spec: GenSpec) -> tuple[int, ...] | None:
    """The assignment a planted instance was built around."""
    if not spec.planted:
        return None
    return _hidden(random.Random(spec.seed), spec.m)


def gen_random(spec: GenSpec) -> Formula:
    """Uniform random k-CNF; planted specs re-roll each clause until the
    hidden assignment satisfies it."""
    rng = random.Random(spec.seed)
    hidden = _hidden(rng, spec.m) if spec.planted else None
    clauses = []
    for _ in range(spec.n):
        while True:
            vars_ = rng.sample(range(spec.m), spec.k)
            lits = tuple(Literal(v, rng.randrange(2)) for v in vars_)
            if hidden is None or any(hidden[l.var] != l.sigma for l in lits):
                break
        clauses.append(Clause(lits))
    return Formula(spec.m, tuple(clauses))


def pass_bound(k: int, n_t: int) -> int:
    """Upper bound on clearing passes: rows per combination times combinations."""
    if n_t == 0:
        return 1
    c = min(k + 1, n_t)
    return (1 << (k * (k + 1))) * math.comb(n_t, c)


def truth_of(f: Formula) -> bool:
    if f.m <= DEFAULT_CAP:
        return brute_force(f).satisfiable
    return dpll(f)


@dataclass
class AuditRecord:
    spec: GenSpec
    claim: str
    truth: bool | None
    classification: str
    n_t: int = 0
    stats: ClearStats = field(default_factory=ClearStats)
    bound: int = 0
    bound_ok: bool = True
    backtracks: int | None = None
    extraction: str | None = None
    wall_time_ms: float = 0.0
    note: str | None = None

    def csv_row(self, timing: bool = False) -> list:
        s = self.spec
        skipped = self.classification == SKIPPED
        return [
            s.seed, s.m, s.n, s.k, self.n_t,
            self.claim, "" if self.truth is None else int(self.truth), self.classification,
            "" if skipped else self.stats.passes,
            "" if skipped else self.stats.pair_clearings,
            "" if skipped else self.stats.rows_removed,
            "" if self.backtracks is None else self.backtracks,
            "" if skipped else int(self.bound_ok),
            f"{self.wall_time_ms:.3f}" if timing else "",
        ]

    def to_dict(self, timing: bool = False) -> dict:
        d = {
            "spec": asdict(self.spec),
            "claim": self.claim,
            "truth": self.truth,
            "classification": self.classification,
            "n_t": self.n_t,
            "stats": self.stats.to_dict(),
            "bound": self.bound,
            "bound_ok": self.bound_ok,
            "backtracks": self.backtracks,
            "extraction": self.extraction,
            "note": self.note,
        }
        if timing:
            d["wall_time_ms"] = round(self.wall_time_ms, 3)
        return d


def classify(claim_sat: bool, truth: bool) -> str:
    if claim_sat == truth:
        return AGREE
    return FALSE_SAT if claim_sat else FALSE_UNSAT


def audit_one(
    spec: GenSpec,
    engine: str = "merged",
    decide_fn: Callable[[Formula], Verdict] | None = None,
    do_extract: bool = True,
) -> AuditRecord:
    f = gen_random(spec)
    t0 = time.perf_counter()
    try:
        if decide_fn is None:
            state = initial_state(f, engine)
            verdict = Verdict(Claim.UNSAT if state.is_empty() else Claim.SAT, replace(state.stats))
            n_t = state.ms.n_t if engine == "merged" else state.rs.groups.n_t
        else:
            state = None
            verdict = decide_fn(f)
            n_t = verdict.n_t
    except InstanceTooWide as exc:
        return AuditRecord(spec, "", None, SKIPPED, note=str(exc))
    elapsed = (time.perf_counter() - t0) * 1000
    truth = truth_of(f)
    bound = pass_bound(spec.k, n_t)
    rec = AuditRecord(
        spec, verdict.kind.value, truth, classify(verdict.sat, truth), n_t, verdict.stats,
        bound, verdict.stats.passes <= bound, wall_time_ms=elapsed,
    )
    if do_extract and verdict.sat:
        ex = extract(f, engine, state=state) if state is not None else extract(f, engine)
        rec.backtracks = ex.backtracks
        rec.extraction = ex.kind
        if ex.kind == "anomaly":
            rec.note = ex.note
    return rec


def run_audit(
    specs: Iterable[GenSpec],
    engine: str = "merged",
    decide_fn: Callable[[Formula], Verdict] | None = None,
    do_extract: bool = True,
    progress: Callable[[int, AuditRecord], None] | None = None,
) -> list[AuditRecord]:
    """One record per spec, in spec order."""
    records = []
    for i, spec in enumerate(specs):
        rec = audit_one(spec, engine, decide_fn, do_extract)
        records.append(rec)
        if progress is not None:
            progress(i, rec)
    return records


def make_specs(m: int, n: int, k: int, count: int, seed: int, planted: bool = False) -> list[GenSpec]:
    return [GenSpec(m, n, k, seed + i, planted) for i in range(count)]


@dataclass
class MinimizationResult:
    original: Formula
    minimized: Formula
    steps: int
    tests: int


def renumber(f: Formula) -> Formula:
    """Map the used variables onto 1..m' keeping their order."""
    used = f.used_vars()
    where = {v: i for i, v in enumerate(used)}
    clauses = tuple(Clause(tuple(Literal(where[l.var], l.sigma) for l in c.literals)) for c in f.clauses)
    return Formula(len(used), clauses)


def minimize(f: Formula, predicate: Callable[[Formula], bool]) -> MinimizationResult:
    """Delta debugging over clauses, then renumbering; the result still
    satisfies ``predicate`` and loses it when any single clause is removed."""
    tests = 0

    def holds(g: Formula) -> bool:
        nonlocal tests
        tests += 1
        return bool(predicate(g))

    if not holds(f):
        raise ValueError("predicate does not hold on the input formula")
    clauses = list(f.clauses)
    steps = 0
    chunks = 2
    while len(clauses) >= 2:
        size = math.ceil(len(clauses) / chunks)
        reduced = False
        for start in range(0, len(clauses), size):
            rest = clauses[:start] + clauses[start + size:]
            if holds(f.with_clauses(rest)):
                clauses = rest
                chunks = max(chunks - 1, 2)
                steps += 1
                reduced = True
                break
        if not reduced:
            if chunks >= len(clauses):
                break
            chunks = min(chunks * 2, len(clauses))
    current, s = _single_pass(f.with_clauses(clauses), holds)
    steps += s
    compact = renumber(current)
    if compact != current and holds(compact):
        current, s = _single_pass(compact, holds)
        steps += s
    return MinimizationResult(f, current, steps, tests)


def _single_pass(g: Formula, holds) -> tuple[Formula, int]:
    """Drop single clauses while the predicate survives."""
    steps = 0
    clauses = list(g.clauses)
    i = 0
    while i < len(clauses):
        rest = clauses[:i] + clauses[i + 1:]
        if holds(g.with_clauses(rest)):
            clauses = rest
            steps += 1
            i = 0
        else:
            i += 1
    return g.with_clauses(clauses), steps


def is_one_minimal(g: Formula, predicate: Callable[[Formula], bool]) -> bool:
    if not predicate(g):
        return False
    cl = list(g.clauses)
    return not any(predicate(g.with_clauses(cl[:i] + cl[i + 1:])) for i in range(len(cl)))


def false_sat_predicate(decide_fn: Callable[[Formula], Verdict] | None = None) -> Callable[[Formula], bool]:
    """Claim says satisfiable while exact search says otherwise."""
    fn = decide_fn or decide

    def pred(g: Formula) -> bool:
        try:
            return fn(g).sat and not truth_of(g)
        except InstanceTooWide:
            return False

    return pred


def disagreement_predicate(decide_fn: Callable[[Formula], Verdict] | None = None) -> Callable[[Formula], bool]:
    fn = decide_fn or decide

    def pred(g: Formula) -> bool:
        try:
            return fn(g).sat != truth_of(g)
        except InstanceTooWide:
            return False

    return pred


def summarize(records: list[AuditRecord]) -> dict:
    done = [r for r in records if r.classification != SKIPPED]
    counts = {c: sum(r.classification == c for r in records) for c in (AGREE, FALSE_SAT, FALSE_UNSAT, SKIPPED)}
    bts = [r.backtracks for r in done if r.backtracks is not None]
    ratios = [r.stats.passes / r.bound for r in done if r.bound]
    return {
        "instances": len(records),
        "decided": len(done),
        "agree": counts[AGREE],
        "false_sat": counts[FALSE_SAT],
        "false_unsat": counts[FALSE_UNSAT],
        "skipped": counts[SKIPPED],
        "agreement_rate": counts[AGREE] / len(done) if done else 1.0,
        "claim_sat": sum(r.claim == Claim.SAT.value for r in done),
        "max_passes": max((r.stats.passes for r in done), default=0),
        "max_pass_bound_ratio": max(ratios, default=0.0),
        "bounds_ok": all(r.bound_ok for r in done),
        "extractions": len(bts),
        "extraction_models": sum(r.extraction == "model" for r in done),
        "extraction_anomalies": sum(r.extraction == "anomaly" for r in done),
        "max_backtracks": max(bts, default=0),
        "total_backtracks": sum(bts),
    }


def report_csv(records: list[AuditRecord], timing: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.csv_row(timing))
    return buf.getvalue()


def export_report(
    records: list[AuditRecord],
    out_dir: str | Path,
    timing: bool = False,
    decide_fn: Callable[[Formula], Verdict] | None = None,
) -> dict:
    """Write ``report.csv``, ``report.json`` and, for every distinct false-sat
    instance, the original and minimized DIMACS files.  Returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "report.csv"
    csv_path.write_text(report_csv(records, timing), encoding="utf-8")
    artifacts = []
    seen = set()
    pred = false_sat_predicate(decide_fn)
    for r in records:
        if r.classification != FALSE_SAT:
            continue
        f = gen_random(r.spec)
        res = minimize(f, pred)
        text = write_dimacs(res.minimized)
        if text in seen:
            continue
        seen.add(text)
        art = out / "counterexamples"
        art.mkdir(exist_ok=True)
        stem = f"seed{r.spec.seed}_m{r.spec.m}_n{r.spec.n}_k{r.spec.k}"
        orig_path = art / f"{stem}.cnf"
        min_path = art / f"{stem}.min.cnf"
        orig_path.write_text(write_dimacs(f, [f"false-sat instance, seed {r.spec.seed}"]), encoding="utf-8")
        min_path.write_text(
            write_dimacs(res.minimized, [f"1-minimal reduction of seed {r.spec.seed}"]), encoding="utf-8"
        )
        artifacts.append({"seed": r.spec.seed, "original": str(orig_path), "minimized": str(min_path),
                          "original_clauses": f.n, "minimized_clauses": res.minimized.n})
    json_path = out / "report.json"
    payload = {
        "columns": CSV_COLUMNS,
        "summary": summarize(records),
        "records": [r.to_dict(timing) for r in records],
        "counterexamples": artifacts,
    }
    json_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return {"csv": str(csv_path), "json": str(json_path), "artifacts": artifacts}


def reverify(path: str | Path, decide_fn: Callable[[Formula], Verdict] | None = None) -> bool:
    """True when the file still shows a false-sat disagreement."""
    g = parse_dimacs(Path(path).read_text(encoding="utf-8"))
    return false_sat_predicate(decide_fn)(g)


def scaling_study(n_t_values: Iterable[int], m: int = 16, k: int = 3, reps: int = 3, seed: int = 0) -> list[tuple[int, float]]:
    """Median decide wall time (seconds) at each target group count.

    Clauses are drawn one at a time until the formula has the requested
    number of groups, so ``n_t`` is exact.
    """
    points = []
    for target in n_t_values:
        times = []
        for rep in range(reps):
            rng = random.Random(seed * 1_000_003 + target * 101 + rep)
            keys = set()
            clauses = []
            while len(keys) < target:
                vars_ = rng.sample(range(m), k)
                c = Clause(tuple(Literal(v, rng.randrange(2)) for v in vars_))
                clauses.append(c)
                keys.add(c.vars)
            f = Formula(m, tuple(clauses))
            t0 = time.perf_counter()
            decide(f)
            times.append(time.perf_counter() - t0)
        points.append((target, float(np.median(times))))
    return points


def fit_exponent(points: list[tuple[int, float]]) -> float:
    """Slope of log(time) against log(n_t)."""
    x = np.log([p[0] for p in points])
    y = np.log([max(p[1], 1e-9) for p in points])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)
