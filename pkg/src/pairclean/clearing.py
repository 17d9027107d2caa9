"""Pairwise clearing of combination value sets and the cleaning fixpoint.

This is the direct, set-based engine: every pair of combinations is cleared
explicitly.  It is the reference for the merged engine and is only practical
while the number of combinations stays small.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import asdict, dataclass
from typing import Callable

from .structure import CombinationValueSet, RelationshipStructure, StructureValues

SCHEDULE_KINDS = ("naive", "worklist", "randomized")


@dataclass
class ClearStats:
    passes: int = 0
    pair_clearings: int = 0
    rows_removed: int = 0
    support_checks: int = 0
    max_pass_support_checks: int = 0

    def add(self, other: ClearStats) -> None:
        self.passes += other.passes
        self.pair_clearings += other.pair_clearings
        self.rows_removed += other.rows_removed
        self.support_checks += other.support_checks
        self.max_pass_support_checks = max(self.max_pass_support_checks, other.max_pass_support_checks)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Schedule:
    kind: str = "naive"
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule {self.kind!r}; expected one of {SCHEDULE_KINDS}")
        if self.kind == "randomized" and self.seed is None:
            raise ValueError("a randomized schedule needs a seed")

    @classmethod
    def parse(cls, text: str) -> Schedule:
        """``naive``, ``worklist`` or ``randomized:<seed>``."""
        kind, _, seed = text.partition(":")
        if kind == "randomized":
            if not seed:
                raise ValueError("use randomized:<seed>")
            return cls(kind, int(seed))
        if seed:
            raise ValueError(f"schedule {kind!r} takes no seed")
        return cls(kind)

    def __str__(self) -> str:
        return f"randomized:{self.seed}" if self.kind == "randomized" else self.kind


NAIVE = Schedule("naive")
WORKLIST = Schedule("worklist")


def _extractor(vars_: tuple[int, ...], positions: list[int]) -> Callable[[int], int]:
    r = len(vars_)
    shifts = [r - 1 - p for p in positions]

    def key(row: int) -> int:
        k = 0
        for s in shifts:
            k = (k << 1) | (row >> s & 1)
        return k

    return key


def _clear(v1, v2, shared, counter):
    """Sequential two-sided semijoin; returns the new row sets."""
    rows1, rows2 = v1.rows, v2.rows
    if not shared:
        # support only needs the other side to be nonempty
        counter[0] += len(rows1) + len(rows2)
        if not rows1 or not rows2:
            return frozenset(), frozenset()
        return rows1, rows2
    key1 = _extractor(v1.vars, [i for i, _ in shared])
    key2 = _extractor(v2.vars, [j for _, j in shared])
    keys2 = {key2(x) for x in rows2}
    new1 = frozenset(x for x in rows1 if key1(x) in keys2)
    keys1 = {key1(x) for x in new1}
    new2 = frozenset(x for x in rows2 if key2(x) in keys1)
    counter[0] += len(rows1) + len(rows2)
    return new1, new2


def clear_pair(
    v1: CombinationValueSet,
    v2: CombinationValueSet,
    shared: tuple[tuple[int, int], ...],
) -> tuple[CombinationValueSet, CombinationValueSet, int]:
    """Delete rows of ``v1`` without a partner in ``v2`` on the shared
    positions, then rows of ``v2`` without a partner in the reduced ``v1``."""
    counter = [0]
    new1, new2 = _clear(v1, v2, shared, counter)
    removed = len(v1) - len(new1) + len(v2) - len(new2)
    return v1.with_rows(new1), v2.with_rows(new2), removed


class _Run:
    def __init__(self, rs, sv, trace):
        self.rs = rs
        self.values = list(sv.per_combination)
        self.trace = trace
        self.stats = ClearStats()
        self.pass_checks = 0

    def clear(self, i, j):
        """Clear pair ``(i, j)``; returns the indices whose sets shrank."""
        v1, v2 = self.values[i], self.values[j]
        counter = [0]
        new1, new2 = _clear(v1, v2, self.rs.shared(i, j), counter)
        self.pass_checks += counter[0]
        self.stats.pair_clearings += 1
        d1 = len(v1) - len(new1)
        d2 = len(v2) - len(new2)
        shrunk = []
        if d1:
            self.values[i] = v1.with_rows(new1)
            shrunk.append(i)
        if d2:
            self.values[j] = v2.with_rows(new2)
            shrunk.append(j)
        self.stats.rows_removed += d1 + d2
        if self.trace is not None:
            self.trace(f"clear {i} {j} removed {d1} {d2}")
        return shrunk

    def end_pass(self):
        self.stats.passes += 1
        self.stats.support_checks += self.pass_checks
        self.stats.max_pass_support_checks = max(self.stats.max_pass_support_checks, self.pass_checks)
        self.pass_checks = 0


def _sweeps(run: _Run, pairs: list[tuple[int, int]], rng: random.Random | None) -> None:
    while True:
        if rng is not None:
            rng.shuffle(pairs)
        removed = 0
        for i, j in pairs:
            removed += len(run.clear(i, j))
        run.end_pass()
        if not removed:
            return


def _worklist(run: _Run, pairs: list[tuple[int, int]], start: list[int] | None) -> None:
    n = len(run.values)
    overlapping = run.rs.overlapping
    if start is None:
        current = deque(pairs)
    else:
        current = deque(sorted({_pair(i, j) for i in start for j in range(n) if j != i}))
    queued = set(current)
    while current:
        nxt = []
        while current:
            i, j = current.popleft()
            queued.discard((i, j))
            for t in run.clear(i, j):
                # an emptied set must reach every combination, not just overlapping ones
                partners = range(n) if not run.values[t] else overlapping[t]
                for u in partners:
                    if u == t:
                        continue
                    p = _pair(t, u)
                    if p not in queued:
                        queued.add(p)
                        nxt.append(p)
        run.end_pass()
        current = deque(sorted(nxt))


def _pair(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


def run_pair_cleaning(
    rs: RelationshipStructure,
    sv: StructureValues,
    sched: Schedule = NAIVE,
    trace: Callable[[str], None] | None = None,
    start: list[int] | None = None,
) -> tuple[StructureValues, ClearStats]:
    """Clear pairs until no clearing removes anything.

    ``start`` (worklist only) limits the initial queue to pairs touching the
    given combinations, for re-clearing after a local change to a fixpoint.
    """
    if len(sv) != len(rs):
        raise ValueError("value sets are not aligned with the structure")
    run = _Run(rs, sv, trace)
    pairs = list(rs.pairs())
    if sched.kind == "naive":
        _sweeps(run, pairs, None)
    elif sched.kind == "randomized":
        _sweeps(run, pairs, random.Random(sched.seed))
    else:
        _worklist(run, pairs, start)
    return StructureValues(run.values), run.stats


def is_empty(sv: StructureValues) -> bool:
    return sv.is_empty()


def is_unclearable(rs: RelationshipStructure, sv: StructureValues) -> bool:
    for i, j in rs.pairs():
        _, _, removed = clear_pair(sv[i], sv[j], rs.shared(i, j))
        if removed:
            return False
    return True


def singletons_agree(rs: RelationshipStructure, sv: StructureValues) -> bool:
    """True when all sets are singletons that agree on every shared variable."""
    if any(len(v) != 1 for v in sv.per_combination):
        return False
    value: dict[int, int] = {}
    for v in sv.per_combination:
        (row,) = v.rows
        for p, var in enumerate(v.vars):
            bit = row >> (v.r - 1 - p) & 1
            if value.setdefault(var, bit) != bit:
                return False
    return True


class LiteralState:
    """Search state over the explicit structure, used for extraction and
    enumeration with the literal engine."""

    def __init__(self, rs: RelationshipStructure, sv: StructureValues, sched: Schedule = WORKLIST):
        self.rs = rs
        self.sv = sv
        self.sched = sched
        self.stats = ClearStats()
        self._index = {c.group_ids: i for i, c in enumerate(rs.combinations)}

    def copy(self) -> LiteralState:
        other = LiteralState.__new__(LiteralState)
        other.rs, other.sv, other.sched = self.rs, self.sv.copy(), self.sched
        other.stats, other._index = self.stats, self._index
        return other

    def propagate(self, start: list[int] | None = None) -> bool:
        if start is not None and not start:
            return not self.is_empty()
        if self.sched.kind != "worklist":
            start = None
        self.sv, stats = run_pair_cleaning(self.rs, self.sv, self.sched, start=start)
        self.stats.add(stats)
        return not self.is_empty()

    def is_empty(self) -> bool:
        return self.sv.is_empty()

    def combination_rows(self, group_ids: tuple[int, ...]) -> CombinationValueSet:
        return self.sv[self._index[group_ids]]

    def next_open(self, cursor: tuple[int, ...] | None):
        """First combination at or after ``cursor`` holding more than one row."""
        start = 0 if cursor is None else self._index[cursor]
        for i in range(start, len(self.rs)):
            v = self.sv[i]
            if len(v) > 1:
                return self.rs.combinations[i].group_ids, sorted(v.rows)
        return None

    def restrict(self, group_ids: tuple[int, ...], row: int) -> bool:
        i = self._index[group_ids]
        v = self.sv[i]
        self.sv.per_combination[i] = v.with_rows({row} & v.rows)
        return self.propagate([i])

    def restrict_var(self, var: int, value: int) -> bool:
        touched = []
        for i, comb in enumerate(self.rs.combinations):
            if var in comb.union_vars:
                v = self.sv[i]
                shift = v.r - 1 - comb.union_vars.index(var)
                kept = {x for x in v.rows if (x >> shift & 1) == value}
                if len(kept) != len(v):
                    self.sv.per_combination[i] = v.with_rows(kept)
                    touched.append(i)
        return self.propagate(touched)

    def assignment(self, m: int) -> tuple[int, ...] | None:
        """Merge all-singleton sets into one assignment (free variables 0);
        None when some set is not a singleton or they disagree."""
        if not singletons_agree(self.rs, self.sv) and len(self.rs):
            return None
        a = [0] * m
        for v in self.sv.per_combination:
            (row,) = v.rows
            for p, var in enumerate(v.vars):
                a[var] = row >> (v.r - 1 - p) & 1
        return tuple(a)
