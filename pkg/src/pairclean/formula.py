"""Uniform-width CNF formulas: representation, DIMACS I/O and evaluation.

Variables are 0-indexed inside the package and 1-indexed in every external
artifact (DIMACS text, labels, reports).  A literal carries a polarity bit
``sigma`` with 0 for a positive occurrence and 1 for a negated one.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DimacsError

Assignment = tuple[int, ...]


@dataclass(frozen=True, order=True)
class Literal:
    var: int
    sigma: int

    def __post_init__(self):
        if self.sigma not in (0, 1):
            raise ValueError(f"sigma must be 0 or 1, got {self.sigma!r}")
        if self.var < 0:
            raise ValueError(f"variable index must be non-negative, got {self.var}")

    @classmethod
    def from_dimacs(cls, lit: int) -> Literal:
        if lit == 0:
            raise ValueError("0 is not a literal")
        return cls(abs(lit) - 1, 1 if lit < 0 else 0)

    def to_dimacs(self) -> int:
        return -(self.var + 1) if self.sigma else self.var + 1

    def satisfied_by(self, value: int) -> bool:
        return value != self.sigma

    def __str__(self) -> str:
        return f"{'~' if self.sigma else ''}x{self.var + 1}"


@dataclass(frozen=True)
class Clause:
    """A disjunction over distinct variables, literals sorted by variable."""

    literals: tuple[Literal, ...]

    def __post_init__(self):
        lits = tuple(sorted(self.literals))
        seen = [lit.var for lit in lits]
        if len(set(seen)) != len(seen):
            raise ValueError(f"clause repeats a variable: {self.to_dimacs_list()}")
        object.__setattr__(self, "literals", lits)

    @classmethod
    def from_dimacs(cls, lits: Iterable[int]) -> Clause:
        return cls(tuple(Literal.from_dimacs(x) for x in lits))

    @property
    def vars(self) -> tuple[int, ...]:
        return tuple(lit.var for lit in self.literals)

    @property
    def sigmas(self) -> tuple[int, ...]:
        return tuple(lit.sigma for lit in self.literals)

    @property
    def width(self) -> int:
        return len(self.literals)

    def to_dimacs_list(self) -> list[int]:
        return [lit.to_dimacs() for lit in self.literals]

    def evaluate(self, assignment: Sequence[int]) -> int:
        return int(any(lit.satisfied_by(assignment[lit.var]) for lit in self.literals))

    def __str__(self) -> str:
        return "(" + " | ".join(str(lit) for lit in self.literals) + ")"


def falsifying_local_assignment(clause: Clause) -> tuple[int, ...]:
    """The only assignment of the clause's own variables (in variable order)
    that makes it false.

    A positive literal is false under 0 and a negated one under 1, so the
    falsifying value of each variable is its polarity bit.
    """
    return clause.sigmas


@dataclass(frozen=True)
class Formula:
    """A conjunction of clauses that all have the same width ``k``.

    ``k`` is derived from the clauses; the empty formula has ``k == 0``.
    """

    m: int
    clauses: tuple[Clause, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))
        if self.m < 0:
            raise ValueError("variable count must be non-negative")
        widths = {c.width for c in self.clauses}
        if len(widths) > 1:
            raise ValueError(f"clauses have differing widths {sorted(widths)}")
        for c in self.clauses:
            if c.width == 0:
                raise ValueError("empty clause")
            if c.literals[-1].var >= self.m:
                raise ValueError(f"clause {c.to_dimacs_list()} uses a variable above m={self.m}")

    @classmethod
    def from_dimacs_clauses(cls, m: int, clauses: Iterable[Iterable[int]]) -> Formula:
        return cls(m, tuple(Clause.from_dimacs(c) for c in clauses))

    @property
    def n(self) -> int:
        return len(self.clauses)

    @property
    def k(self) -> int:
        return self.clauses[0].width if self.clauses else 0

    def used_vars(self) -> list[int]:
        return sorted({v for c in self.clauses for v in c.vars})

    def with_clauses(self, clauses: Iterable[Clause]) -> Formula:
        return Formula(self.m, tuple(clauses))

    def __str__(self) -> str:
        return " & ".join(str(c) for c in self.clauses) or "TRUE"


def evaluate(f: Formula, a: Sequence[int]) -> int:
    if len(a) != f.m:
        raise ValueError(f"assignment has length {len(a)}, formula has m={f.m}")
    return int(all(c.evaluate(a) for c in f.clauses))


def parse_dimacs(text: str) -> Formula:
    """Parse DIMACS CNF text into a :class:`Formula`.

    Clauses may span lines; a trailing clause without its terminating 0 is
    accepted.  Everything after a line holding only ``%`` is ignored.
    """
    header = None
    clauses: list[list[int]] = []
    starts: list[int] = []
    cur: list[int] = []
    cur_start = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line == "%":
            break
        if line.startswith("p"):
            if header is not None:
                raise DimacsError("second problem line", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"expected 'p cnf <vars> <clauses>', got {line!r}", lineno)
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise DimacsError(f"non-integer counts in {line!r}", lineno) from None
            if header[0] < 0 or header[1] < 0:
                raise DimacsError("negative counts in problem line", lineno)
            continue
        if header is None:
            raise DimacsError("clause data before the problem line", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"bad literal {tok!r}", lineno) from None
            if not cur:
                cur_start = lineno
            if lit == 0:
                if not cur:
                    raise DimacsError("empty clause", lineno)
                clauses.append(cur)
                starts.append(cur_start)
                cur = []
            else:
                if abs(lit) > header[0]:
                    raise DimacsError(f"literal {lit} exceeds variable count {header[0]}", lineno)
                cur.append(lit)
    if cur:
        clauses.append(cur)
        starts.append(cur_start)
    if header is None:
        raise DimacsError("missing 'p cnf' problem line")
    m, n = header
    if len(clauses) != n:
        raise DimacsError(f"header announces {n} clauses, found {len(clauses)}")

    parsed = []
    for lits, line in zip(clauses, starts):
        if len({abs(x) for x in lits}) != len(lits):
            raise DimacsError(f"clause {lits} repeats a variable", line)
        parsed.append(Clause.from_dimacs(lits))
    if parsed:
        k = parsed[0].width
        for c, line in zip(parsed, starts):
            if c.width != k:
                raise DimacsError(
                    f"clause {c.to_dimacs_list()} has width {c.width}, expected uniform width {k}",
                    line,
                )
    return Formula(m, tuple(parsed))


def read_dimacs(path: str | Path) -> Formula:
    return parse_dimacs(Path(path).read_text(encoding="utf-8"))


def write_dimacs(f: Formula, comments: Iterable[str] = ()) -> str:
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {f.m} {f.n}")
    for c in f.clauses:
        lines.append(" ".join(str(x) for x in c.to_dimacs_list()) + " 0")
    return "\n".join(lines) + "\n"


def assignment_from_bits(bits: str) -> Assignment:
    return tuple(int(b) for b in bits)


def assignment_to_dimacs(a: Sequence[int]) -> str:
    """Render a model as a DIMACS ``v`` line."""
    lits = [str(i + 1) if v else str(-(i + 1)) for i, v in enumerate(a)]
    return "v " + " ".join(lits + ["0"])
