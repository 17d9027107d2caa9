"""Merged clearing engine.

The literal structure holds one value set per combination, and there are
C(n_t, k+1) of them.  Many combinations share the same union of
variables, and clearing forces every combination whose variables lie inside
another's to equal that one's projection.  So the fixpoint is carried
by one relation per *maximal* union (a node): all assignments of the node's
variables that satisfy every group lying inside it.  Nodes are then cleared
against each other on their shared variables.  A combination's value set is
the projection of any node containing its variables.

Only the separators that are not implied by larger overlaps are enforced.
The node, separator and row work happens in the compiled kernels.
"""

from __future__ import annotations

import copy
import math

import numpy as np

from . import _kernels as K
from .clearing import WORKLIST, ClearStats, Schedule
from .errors import InstanceTooWide
from .formula import Formula
from .groups import build_groups
from .structure import CombinationValueSet, combination_size, max_width_from_env

MAX_USED_VARS = 62


class MergedStructure:
    """Static part of the merged engine: nodes, their initial rows and the
    separators between them, over the compacted set of used variables."""

    def __init__(self, f: Formula, max_width: int | None = None, keep_all_separators: bool = False):
        self.formula = f
        self.groups = build_groups(f)
        self.n_t = self.groups.n_t
        self.c = combination_size(self.groups)
        self.used = f.used_vars()
        self.mu = len(self.used)
        if self.mu > MAX_USED_VARS:
            raise InstanceTooWide(f"{self.mu} used variables; the merged engine handles at most {MAX_USED_VARS}")
        if max_width is None:
            max_width = max_width_from_env()
        self.keep_all_separators = keep_all_separators
        compact = {v: i for i, v in enumerate(self.used)}
        self._compact = compact
        mu = self.mu

        def bit(v):
            return np.int64(1) << np.int64(mu - 1 - compact[v])

        gm = np.zeros(self.n_t, dtype=np.int64)
        cv, cf = [], []
        for t, g in enumerate(self.groups.groups):
            mask = np.int64(0)
            for v in g.key:
                mask |= bit(v)
            gm[t] = mask
            for row in sorted(g.excluded):
                pattern = np.int64(0)
                for v, b in zip(g.key, row):
                    if b:
                        pattern |= bit(v)
                cv.append(mask)
                cf.append(pattern)
        self.group_masks = gm
        self.clause_vars = np.array(cv, dtype=np.int64)
        self.clause_false = np.array(cf, dtype=np.int64)

        if self.n_t:
            self.node_masks = K.maximal_unions(gm, self.c, mu)
        else:
            self.node_masks = np.zeros(0, dtype=np.int64)
        widest = max((bin(int(x)).count("1") for x in self.node_masks), default=0)
        if widest > max_width:
            raise InstanceTooWide(
                f"a combination spans {widest} variables, above the enumeration bound of {max_width}"
            )
        self.rows, self.offsets = K.build_rows(self.node_masks, self.clause_vars, self.clause_false, mu)
        self._separators = None

    @property
    def n_nodes(self) -> int:
        return int(self.node_masks.shape[0])

    @property
    def n_combinations(self) -> int:
        return math.comb(self.n_t, self.c) if self.n_t else 0

    def separators(self):
        """``(sep, pos, pos_off, inc, inc_off, node_sep, node_sep_off)``, built on first use."""
        if self._separators is None:
            nm = self.node_masks
            inter = K.pairwise_intersection_sizes(nm)
            cand = K.distinct_intersections(nm, self.mu)
            sep, inc, inc_off = K.select_separators(nm, inter, cand, self.mu, self.keep_all_separators)
            pos, pos_off, node_sep, node_sep_off = K.separator_layout(sep, inc, inc_off, self.n_nodes, self.mu)
            self._separators = (sep, pos, pos_off, inc, inc_off, node_sep, node_sep_off)
        return self._separators

    def var_bit(self, v: int) -> int:
        return 1 << (self.mu - 1 - self._compact[v])

    def combination_mask(self, group_ids) -> int:
        x = 0
        for i in group_ids:
            x |= int(self.group_masks[i])
        return x

    def mask_vars(self, mask: int) -> tuple[int, ...]:
        return tuple(v for i, v in enumerate(self.used) if mask >> (self.mu - 1 - i) & 1)

    def with_rows(self, rows: np.ndarray, offsets: np.ndarray) -> MergedStructure:
        """Same nodes and separators over a smaller row table."""
        other = copy.copy(self)
        other.rows, other.offsets = rows, offsets
        return other

    def initial_state(self, sched: Schedule = WORKLIST) -> MergedState:
        return MergedState(self, sched)


def _bit_shifts(mask: int, mu: int) -> list[int]:
    """Global bit positions of ``mask``, most significant first."""
    return [mu - 1 - i for i in range(mu) if mask >> (mu - 1 - i) & 1]


def to_local(row: int, shifts: list[int]) -> int:
    x = 0
    for s in shifts:
        x = (x << 1) | (row >> s & 1)
    return x


def from_local(local: int, shifts: list[int]) -> int:
    x = 0
    width = len(shifts)
    for t, s in enumerate(shifts):
        if local >> (width - 1 - t) & 1:
            x |= 1 << s
    return x


class MergedState:
    """Mutable row liveness over a :class:`MergedStructure`."""

    def __init__(self, ms: MergedStructure, sched: Schedule = WORKLIST):
        self.ms = ms
        self.sched = sched
        self.alive = np.ones(ms.rows.shape[0], dtype=np.uint8)
        self.counts = np.diff(ms.offsets).astype(np.int64)
        self.stats = ClearStats()
        self.empty = bool((self.counts == 0).any())
        self._rng = np.random.default_rng(sched.seed) if sched.kind == "randomized" else None

    def copy(self) -> MergedState:
        other = MergedState.__new__(MergedState)
        other.ms, other.sched, other.stats = self.ms, self.sched, self.stats
        other.alive = self.alive.copy()
        other.counts = self.counts.copy()
        other.empty = self.empty
        other._rng = self._rng
        return other

    def is_empty(self) -> bool:
        return self.empty

    def compact(self) -> MergedState:
        """Drop dead rows from the row table; later propagation then only
        scans live rows."""
        if self.empty:
            return self
        keep = self.alive.astype(bool)
        offsets = np.zeros_like(self.ms.offsets)
        np.cumsum(self.counts, out=offsets[1:])
        other = self.copy()
        other.ms = self.ms.with_rows(self.ms.rows[keep], offsets)
        other.alive = np.ones(int(offsets[-1]), dtype=np.uint8)
        other.counts = self.counts.copy()
        return other

    def propagate(self, changed_nodes=None) -> bool:
        """Clear to a fixpoint; ``changed_nodes`` limits the initial queue
        (ignored by the naive schedule, which always sweeps everything)."""
        if self.empty:
            return False
        if self.ms.n_nodes == 0:
            return True
        sep, pos, pos_off, inc, inc_off, node_sep, node_sep_off = self.ms.separators()
        n_sep = sep.shape[0]
        if changed_nodes is None or self.sched.kind == "naive":
            queue = np.arange(n_sep, dtype=np.int64)
        else:
            changed_nodes = np.asarray(changed_nodes, dtype=np.int64)
            if changed_nodes.size == 0:
                return True
            parts = [node_sep[node_sep_off[nd]:node_sep_off[nd + 1]] for nd in changed_nodes]
            queue = np.unique(np.concatenate(parts)) if parts else np.zeros(0, dtype=np.int64)
        if self._rng is not None:
            order = self._rng.permutation(n_sep).astype(np.int64)
        else:
            order = np.arange(n_sep, dtype=np.int64)
        raw = np.zeros(6, dtype=np.int64)
        ok = K.propagate(self.ms.rows, self.ms.offsets, self.alive, self.counts, pos, pos_off,
                         inc, inc_off, node_sep, node_sep_off, queue, order,
                         self.sched.kind == "naive", raw)
        self.stats.passes += int(raw[0])
        self.stats.pair_clearings += int(raw[1])
        self.stats.rows_removed += int(raw[2])
        self.stats.support_checks += int(raw[3])
        self.stats.max_pass_support_checks = max(self.stats.max_pass_support_checks, int(raw[4]))
        if not ok:
            self.empty = True
        return ok

    def _host(self, mask: int) -> int:
        nm = self.ms.node_masks
        hits = np.nonzero((nm & np.int64(mask)) == np.int64(mask))[0]
        return int(hits[0])

    def _alive_rows(self, node: int) -> np.ndarray:
        lo, hi = self.ms.offsets[node], self.ms.offsets[node + 1]
        return self.ms.rows[lo:hi][self.alive[lo:hi].astype(bool)]

    def combination_rows(self, group_ids) -> CombinationValueSet:
        mask = self.ms.combination_mask(group_ids)
        vars_ = self.ms.mask_vars(mask)
        if self.empty:
            return CombinationValueSet(vars_, frozenset())
        shifts = _bit_shifts(mask, self.ms.mu)
        proj = np.unique(self._alive_rows(self._host(mask)) & np.int64(mask))
        return CombinationValueSet(vars_, frozenset(to_local(int(x), shifts) for x in proj))

    def next_open(self, cursor):
        """First combination (lexicographic group ids) at or after ``cursor``
        whose projected set has more than one row, with its sorted local rows."""
        ms = self.ms
        if self.empty or ms.n_t == 0:
            return None
        idx = np.array(cursor if cursor is not None else range(ms.c), dtype=np.int64)
        host = K.next_open_combination(idx, ms.group_masks, ms.node_masks, ms.rows, ms.offsets,
                                       self.alive, self.counts)
        if host < 0:
            return None
        group_ids = tuple(int(i) for i in idx)
        mask = ms.combination_mask(group_ids)
        shifts = _bit_shifts(mask, ms.mu)
        proj = np.unique(self._alive_rows(host) & np.int64(mask))
        return group_ids, [to_local(int(x), shifts) for x in proj]

    def restrict(self, group_ids, row: int) -> bool:
        """Keep only rows agreeing with local ``row`` on the combination's
        variables, then clear to a fixpoint again."""
        ms = self.ms
        mask = ms.combination_mask(group_ids)
        pattern = from_local(row, _bit_shifts(mask, ms.mu))
        changed = K.restrict(ms.node_masks, ms.rows, ms.offsets, self.alive, self.counts,
                             np.int64(mask), np.int64(pattern))
        return self._after_restrict(changed)

    def restrict_var(self, var: int, value: int) -> bool:
        ms = self.ms
        if var not in ms._compact:
            return not self.empty
        b = ms.var_bit(var)
        changed = K.restrict(ms.node_masks, ms.rows, ms.offsets, self.alive, self.counts,
                             np.int64(b), np.int64(b if value else 0))
        return self._after_restrict(changed)

    def _after_restrict(self, changed) -> bool:
        if self.empty:
            return False
        if changed.size and (self.counts[changed] == 0).any():
            self.empty = True
            return False
        return self.propagate(changed)

    def all_singleton(self) -> bool:
        return not self.empty and bool((self.counts == 1).all())

    def assignment(self, m: int) -> tuple[int, ...] | None:
        """The assignment spelled out by all-singleton nodes (free variables
        0), or None if some node is open or two nodes disagree."""
        if self.empty or not (self.counts == 1).all():
            return None
        ms = self.ms
        a = [0] * m
        if ms.n_nodes == 0:
            return tuple(a)
        # one live row per node, in node order
        single = ms.rows[self.alive.astype(bool)]
        for i, v in enumerate(ms.used):
            s = np.int64(ms.mu - 1 - i)
            inside = (ms.node_masks >> s) & 1 == 1
            values = (single[inside] >> s) & 1
            if values.size == 0 or values.min() != values.max():
                return None
            a[v] = int(values[0])
        return tuple(a)


def merged_fixpoint(f: Formula, sched: Schedule = WORKLIST, max_width: int | None = None):
    """Build the merged structure and clear it; returns ``(structure, state)``."""
    ms = MergedStructure(f, max_width)
    state = ms.initial_state(sched)
    state.propagate()
    return ms, state
