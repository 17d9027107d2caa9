"""Clause groups: clauses bucketed by the exact tuple of variables they use.

Local assignments of a group's variables are encoded as integers with the
first (lowest-numbered) variable as the most significant bit, so the value set
of a group is a ``2**k``-bit mask.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from .formula import Formula, falsifying_local_assignment

MAX_GROUP_WIDTH = 8


def var_label(vars_: tuple[int, ...]) -> str:
    """``(0, 1, 2)`` -> ``"123"``; falls back to dots once an index exceeds 9."""
    names = [str(v + 1) for v in vars_]
    if all(len(s) == 1 for s in names):
        return "".join(names)
    return ".".join(names)


def bits_to_int(bits: tuple[int, ...]) -> int:
    x = 0
    for b in bits:
        x = (x << 1) | b
    return x


def int_to_bits(x: int, width: int) -> tuple[int, ...]:
    return tuple((x >> (width - 1 - i)) & 1 for i in range(width))


@dataclass(frozen=True)
class GroupValueSet:
    key: tuple[int, ...]
    allowed: int

    @property
    def k(self) -> int:
        return len(self.key)

    def rows(self) -> list[tuple[int, ...]]:
        return [int_to_bits(i, self.k) for i in range(1 << self.k) if self.allowed >> i & 1]

    def __contains__(self, row: tuple[int, ...]) -> bool:
        return bool(self.allowed >> bits_to_int(row) & 1)

    def __len__(self) -> int:
        return bin(self.allowed).count("1")


@dataclass(frozen=True)
class ClauseGroup:
    key: tuple[int, ...]
    excluded: frozenset[tuple[int, ...]]

    @property
    def k(self) -> int:
        return len(self.key)

    @property
    def label(self) -> str:
        return "T_" + var_label(self.key)

    def allowed_mask(self) -> int:
        full = (1 << (1 << self.k)) - 1
        for row in self.excluded:
            full &= ~(1 << bits_to_int(row))
        return full


def group_value_set(g: ClauseGroup) -> GroupValueSet:
    return GroupValueSet(g.key, g.allowed_mask())


@dataclass(frozen=True)
class GroupIndex:
    groups: tuple[ClauseGroup, ...]
    k: int

    @property
    def n_t(self) -> int:
        return len(self.groups)

    def __len__(self) -> int:
        return len(self.groups)

    def __getitem__(self, i: int) -> ClauseGroup:
        return self.groups[i]

    def position(self, key: tuple[int, ...]) -> int:
        for i, g in enumerate(self.groups):
            if g.key == key:
                return i
        raise KeyError(key)

    def dump(self) -> str:
        lines = []
        for g in self.groups:
            width = max(1, (1 << g.k) // 4)
            rows = ", ".join("(" + ",".join(map(str, r)) + ")" for r in sorted(g.excluded))
            lines.append(f"{g.label}: allowed=0x{g.allowed_mask():0{width}x} excluded={{{rows}}}")
        return "\n".join(lines)


def build_groups(f: Formula) -> GroupIndex:
    """Partition the clauses of ``f`` by variable tuple.

    Duplicate clauses collapse onto the same excluded row, so they change
    neither the group count nor the value sets.
    """
    if f.k > MAX_GROUP_WIDTH:
        raise ValueError(f"clause width {f.k} exceeds the supported maximum {MAX_GROUP_WIDTH}")
    buckets: dict[tuple[int, ...], set[tuple[int, ...]]] = defaultdict(set)
    for c in f.clauses:
        buckets[c.vars].add(falsifying_local_assignment(c))
    groups = tuple(ClauseGroup(key, frozenset(rows)) for key, rows in sorted(buckets.items()))
    return GroupIndex(groups, f.k)
