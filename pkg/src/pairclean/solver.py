"""Decision, model extraction and model enumeration on top of clearing.

``decide`` reports what the cleaning fixpoint claims.  ``extract`` and
``enumerate_models`` search with clearing as the propagator and verify every
assignment they return, so their answers never depend on that claim.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from .clearing import NAIVE, WORKLIST, ClearStats, LiteralState, Schedule, run_pair_cleaning
from .formula import Assignment, Formula, evaluate
from .merged import MergedStructure
from .structure import build_structure

ENGINES = ("naive", "worklist", "merged")


class Claim(enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"


@dataclass
class Verdict:
    kind: Claim
    stats: ClearStats
    anomaly: str | None = None
    n_t: int = 0
    n_combinations: int = 0

    @property
    def sat(self) -> bool:
        return self.kind is Claim.SAT


@dataclass
class Event:
    combination: tuple[int, ...]
    row: int
    outcome: str

    def to_dict(self) -> dict:
        return {"combination": list(self.combination), "row": self.row, "outcome": self.outcome}


@dataclass
class ExtractionResult:
    kind: str
    model: Assignment | None = None
    backtracks: int = 0
    events: list[Event] = field(default_factory=list)
    stats: ClearStats = field(default_factory=ClearStats)
    note: str | None = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "model": list(self.model) if self.model is not None else None,
            "backtracks": self.backtracks,
            "events": [e.to_dict() for e in self.events if e.outcome != "ok"],
            "stats": self.stats.to_dict(),
            "note": self.note,
        }


def _check_engine(engine: str) -> None:
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; expected one of {ENGINES}")


def initial_state(f: Formula, engine: str = "merged", sched: Schedule | None = None, max_width=None):
    """Cleared starting state for the chosen engine.

    ``engine`` names the literal schedules (``naive``, ``worklist``) or the
    merged engine; ``sched`` overrides the schedule used inside it.
    """
    _check_engine(engine)
    if engine == "merged":
        ms = MergedStructure(f, max_width)
        state = ms.initial_state(sched or WORKLIST)
        state.propagate()
        return state.compact()
    rs, sv = build_structure(f, max_width)
    if sched is None:
        sched = NAIVE if engine == "naive" else WORKLIST
    sv, stats = run_pair_cleaning(rs, sv, sched)
    state = LiteralState(rs, sv, sched)
    state.stats = stats
    return state


def decide(f: Formula, engine: str = "merged", sched: Schedule | None = None, max_width=None) -> Verdict:
    state = initial_state(f, engine, sched, max_width)
    if engine == "merged":
        n_t, n_comb = state.ms.n_t, state.ms.n_combinations
    else:
        n_t, n_comb = state.rs.groups.n_t, len(state.rs)
    kind = Claim.UNSAT if state.is_empty() else Claim.SAT
    return Verdict(kind, replace(state.stats), None, n_t, n_comb)


def extract(f: Formula, engine: str = "merged", max_width=None, state=None) -> ExtractionResult:
    """Find a model by fixing combinations to their smallest remaining row.

    Combinations are visited in lexicographic order.  A choice that empties
    the structure is recorded as an anomaly event and undone (chronological
    backtracking), so the search is complete: a nonempty fixpoint with no
    model is reported as an anomaly, never as unsatisfiable.
    """
    if state is None:
        state = initial_state(f, engine, max_width=max_width)
    # count only the clearing done by the search itself
    state = state.copy()
    state.stats = ClearStats()
    result = ExtractionResult("unsat", stats=state.stats)
    if state.is_empty():
        return result
    found = _search(state, None, result)
    if found is None:
        result.kind = "anomaly"
        result.note = "cleaning fixpoint is nonempty but no choice of rows leads to a model"
        return result
    model = found.assignment(f.m)
    if model is None:
        result.kind = "anomaly"
        result.note = "singleton value sets disagree on a shared variable"
        return result
    if not evaluate(f, model):
        result.kind = "anomaly"
        result.note = "merged singleton rows do not satisfy the formula"
        return result
    result.kind = "model"
    result.model = model
    return result


def _search(state, cursor, result: ExtractionResult):
    nxt = state.next_open(cursor)
    if nxt is None:
        return state
    group_ids, rows = nxt
    for row in rows:
        child = state.copy()
        if child.restrict(group_ids, row):
            result.events.append(Event(group_ids, row, "ok"))
            found = _search(child, group_ids, result)
            if found is not None:
                return found
        else:
            result.backtracks += 1
            result.events.append(Event(group_ids, row, "dead-end"))
    return None


def enumerate_models(f: Formula, limit: int | None = None, engine: str = "merged", max_width=None) -> list[Assignment]:
    """Models in lexicographic order, at most ``limit`` of them.

    Variables are fixed in ascending order, 0 before 1, and each choice is
    followed by clearing; a branch is abandoned as soon as the structure
    empties.  Variables in no clause branch freely.
    """
    if limit is not None and limit < 1:
        raise ValueError("limit must be at least 1")
    state = initial_state(f, engine, max_width=max_width)
    out: list[Assignment] = []
    if state.is_empty():
        return out
    prefix = [0] * f.m

    def walk(st, var):
        if limit is not None and len(out) >= limit:
            return
        if var == f.m:
            a = tuple(prefix)
            if evaluate(f, a):
                out.append(a)
            return
        for value in (0, 1):
            child = st.copy()
            if child.restrict_var(var, value):
                prefix[var] = value
                walk(child, var + 1)
                if limit is not None and len(out) >= limit:
                    return
        prefix[var] = 0

    walk(state, 0)
    return out
