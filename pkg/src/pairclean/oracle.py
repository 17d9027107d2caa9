"""Ground truth for small formulas: exhaustive search and a plain DPLL.

Nothing here uses the clearing code; it depends only on the formula model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import OracleCapExceeded
from .formula import Assignment, Formula

DEFAULT_CAP = 26


@dataclass
class OracleResult:
    satisfiable: bool
    models: list[Assignment] | None = None
    assignments_checked: int = 0
    extra: dict = field(default_factory=dict)


@njit(cache=True)
def _scan(pos_mask, neg_mask, m, limit):
    """Assignments in ascending order (x1 most significant) that satisfy
    every clause, stopping after ``limit``.  Also returns how many were
    examined."""
    total = np.int64(1) << m
    out = np.empty(min(limit, 1024), dtype=np.int64)
    found = 0
    n_cl = pos_mask.shape[0]
    x = np.int64(0)
    while x < total:
        ok = True
        for c in range(n_cl):
            # satisfied iff a positive literal is 1 or a negated one is 0
            if (x & pos_mask[c]) == 0 and (~x & neg_mask[c]) == 0:
                ok = False
                break
        if ok:
            if found == out.shape[0]:
                bigger = np.empty(out.shape[0] * 2, dtype=np.int64)
                bigger[:found] = out[:found]
                out = bigger
            out[found] = x
            found += 1
            if found >= limit:
                x += 1
                break
        x += 1
    return out[:found].copy(), x


def _clause_masks(f: Formula):
    pos = np.zeros(f.n, dtype=np.int64)
    neg = np.zeros(f.n, dtype=np.int64)
    for i, c in enumerate(f.clauses):
        for lit in c.literals:
            bit = np.int64(1) << np.int64(f.m - 1 - lit.var)
            if lit.sigma:
                neg[i] |= bit
            else:
                pos[i] |= bit
    return pos, neg


def _decode(x: int, m: int) -> Assignment:
    return tuple((x >> (m - 1 - i)) & 1 for i in range(m))


def brute_force(f: Formula, enumerate: bool = False, cap: int = DEFAULT_CAP) -> OracleResult:
    """Check all ``2**m`` assignments; models come back in lexicographic order."""
    if f.m > cap:
        raise OracleCapExceeded(f"m={f.m} exceeds the exhaustive-search cap of {cap}")
    pos, neg = _clause_masks(f)
    limit = (1 << f.m) if enumerate else 1
    found, checked = _scan(pos, neg, f.m, limit)
    models = [_decode(int(x), f.m) for x in found] if enumerate else None
    return OracleResult(bool(found.size), models, int(checked))


def dpll(f: Formula) -> bool:
    """Backtracking with unit propagation; no learning."""
    clauses = [tuple((lit.var, lit.sigma) for lit in c.literals) for c in f.clauses]
    return _dpll(clauses, {})


def _dpll(clauses, assign: dict[int, int]) -> bool:
    assign = dict(assign)
    while True:
        unit = None
        for c in clauses:
            free = None
            n_free = 0
            sat = False
            for var, sigma in c:
                val = assign.get(var)
                if val is None:
                    n_free += 1
                    free = (var, sigma)
                elif val != sigma:
                    sat = True
                    break
            if sat:
                continue
            if n_free == 0:
                return False
            if n_free == 1:
                unit = free
                break
        if unit is None:
            break
        var, sigma = unit
        assign[var] = 1 - sigma
    for c in clauses:
        for var, sigma in c:
            if var not in assign:
                for value in (0, 1):
                    trial = dict(assign)
                    trial[var] = value
                    if _dpll(clauses, trial):
                        return True
                return False
    return True
