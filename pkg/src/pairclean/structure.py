"""Clause combinations and their value sets.

A combination is a set of clause groups; its value set lists assignments of
the union of the groups' variables.  Rows are encoded as integers over the
combination's ``union_vars`` with the lowest-numbered variable as the most
significant bit.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from functools import cached_property

from .errors import InstanceTooWide
from .formula import Formula
from .groups import GroupIndex, bits_to_int, build_groups, int_to_bits, var_label

DEFAULT_MAX_WIDTH = 24
DEFAULT_MAX_COMBINATIONS = 3_000
WIDTH_ENV = "PAIRCLEAN_MAX_WIDTH"


def max_width_from_env() -> int:
    raw = os.environ.get(WIDTH_ENV)
    if not raw:
        return DEFAULT_MAX_WIDTH
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{WIDTH_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError(f"{WIDTH_ENV} must be positive")
    return value


def combination_size(gi: GroupIndex) -> int:
    """Groups per combination: ``k + 1``, or all groups when there are fewer."""
    return min(gi.k + 1, gi.n_t)


@dataclass(frozen=True)
class Combination:
    group_ids: tuple[int, ...]
    union_vars: tuple[int, ...]

    @property
    def r(self) -> int:
        return len(self.union_vars)

    def label(self, gi: GroupIndex) -> str:
        return "F(" + ", ".join(gi[i].label for i in self.group_ids) + ")"


@dataclass(frozen=True)
class CombinationValueSet:
    vars: tuple[int, ...]
    rows: frozenset[int]

    @classmethod
    def from_tuples(cls, vars_, tuples) -> CombinationValueSet:
        vars_ = tuple(vars_)
        rows = []
        for t in tuples:
            if len(t) != len(vars_):
                raise ValueError(f"row {t} does not match variables {vars_}")
            rows.append(bits_to_int(tuple(t)))
        return cls(vars_, frozenset(rows))

    @property
    def r(self) -> int:
        return len(self.vars)

    def tuples(self) -> list[tuple[int, ...]]:
        return [int_to_bits(x, self.r) for x in sorted(self.rows)]

    def bitstrings(self) -> list[str]:
        return ["".join(map(str, t)) for t in self.tuples()]

    def with_rows(self, rows) -> CombinationValueSet:
        return CombinationValueSet(self.vars, frozenset(rows))

    def __len__(self) -> int:
        return len(self.rows)

    def __bool__(self) -> bool:
        return bool(self.rows)


def shared_positions(vars1: tuple[int, ...], vars2: tuple[int, ...]) -> tuple[tuple[int, int], ...]:
    """Positions ``(i, j)`` with ``vars1[i] == vars2[j]``, in variable order."""
    where = {v: j for j, v in enumerate(vars2)}
    return tuple((i, where[v]) for i, v in enumerate(vars1) if v in where)


@dataclass
class RelationshipStructure:
    groups: GroupIndex
    c: int
    combinations: tuple[Combination, ...]
    _shared: dict = field(default_factory=dict, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.combinations)

    def shared(self, i: int, j: int) -> tuple[tuple[int, int], ...]:
        """Common-variable positions of combinations ``i < j`` (cached)."""
        key = (i, j)
        hit = self._shared.get(key)
        if hit is None:
            hit = shared_positions(self.combinations[i].union_vars, self.combinations[j].union_vars)
            self._shared[key] = hit
        return hit

    def pairs(self):
        return itertools.combinations(range(len(self.combinations)), 2)

    @cached_property
    def overlapping(self) -> list[list[int]]:
        """For each combination, the other combinations it shares a variable with."""
        sets = [set(c.union_vars) for c in self.combinations]
        out = [[] for _ in sets]
        for i, j in self.pairs():
            if sets[i] & sets[j]:
                out[i].append(j)
                out[j].append(i)
        return out

    def to_json(self, values: StructureValues | None = None) -> dict:
        data = {
            "groups": [g.label for g in self.groups.groups],
            "combinations": [[self.groups[i].label for i in c.group_ids] for c in self.combinations],
            "union_vars": [[v + 1 for v in c.union_vars] for c in self.combinations],
        }
        if values is not None:
            data["value_sets"] = [v.bitstrings() for v in values.per_combination]
        return data


@dataclass
class StructureValues:
    per_combination: list[CombinationValueSet]

    def is_empty(self) -> bool:
        return any(not v for v in self.per_combination)

    def total_rows(self) -> int:
        return sum(len(v) for v in self.per_combination)

    def copy(self) -> StructureValues:
        return StructureValues(list(self.per_combination))

    def __len__(self) -> int:
        return len(self.per_combination)

    def __getitem__(self, i: int) -> CombinationValueSet:
        return self.per_combination[i]


def union_vars(group_ids, gi: GroupIndex) -> tuple[int, ...]:
    if isinstance(group_ids, Combination):
        group_ids = group_ids.group_ids
    return tuple(sorted({v for i in group_ids for v in gi[i].key}))


def enumerate_combinations(gi: GroupIndex, c: int) -> RelationshipStructure:
    """All ``c``-subsets of the groups in lexicographic order.

    With ``c >= n_t`` the structure holds a single combination of every group;
    with no groups at all it is empty.
    """
    if c < 1:
        raise ValueError("combination size must be at least 1")
    if gi.n_t == 0:
        return RelationshipStructure(gi, 0, ())
    c = min(c, gi.n_t)
    combos = tuple(
        Combination(ids, union_vars(ids, gi)) for ids in itertools.combinations(range(gi.n_t), c)
    )
    return RelationshipStructure(gi, c, combos)


def induced_value_set(comb: Combination, gi: GroupIndex) -> CombinationValueSet:
    """Every assignment of ``comb.union_vars`` that satisfies all member groups.

    Computed by filtering all ``2**r`` assignments.
    """
    r = comb.r
    where = {v: p for p, v in enumerate(comb.union_vars)}
    checks = []
    for i in comb.group_ids:
        g = gi[i]
        shifts = [r - 1 - where[v] for v in g.key]
        checks.append((shifts, g.allowed_mask()))
    rows = []
    for x in range(1 << r):
        for shifts, allowed in checks:
            local = 0
            for s in shifts:
                local = (local << 1) | (x >> s & 1)
            if not allowed >> local & 1:
                break
        else:
            rows.append(x)
    return CombinationValueSet(comb.union_vars, frozenset(rows))


def build_structure(
    f: Formula,
    max_width: int | None = None,
    max_combinations: int = DEFAULT_MAX_COMBINATIONS,
) -> tuple[RelationshipStructure, StructureValues]:
    gi = build_groups(f)
    c = combination_size(gi)
    if max_width is None:
        max_width = max_width_from_env()
    if gi.n_t and math.comb(gi.n_t, c) > max_combinations:
        raise InstanceTooWide(
            f"{math.comb(gi.n_t, c)} combinations exceed the limit of {max_combinations} "
            "for the explicit structure; use the merged engine"
        )
    rs = enumerate_combinations(gi, max(c, 1))
    widest = max((comb.r for comb in rs.combinations), default=0)
    if widest > max_width:
        raise InstanceTooWide(
            f"a combination spans {widest} variables, above the enumeration bound of {max_width}"
        )
    sv = StructureValues([induced_value_set(comb, gi) for comb in rs.combinations])
    return rs, sv


def combination_label(vars_: tuple[int, ...]) -> str:
    return "x_" + var_label(vars_)
