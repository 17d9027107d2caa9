"""Compiled inner loops for the merged clearing engine.

Everything here works on plain int64 arrays.  A variable set or an assignment
is a bit mask in which variable ``v`` occupies bit ``m - 1 - v``: comparing two
masks as integers then matches comparing the assignments lexicographically
with the lowest-numbered variable most significant.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_EMPTY_KEY = np.int64(-1)


def _popcount_table():
    t = np.zeros(1 << 16, dtype=np.int64)
    for i in range(1, 1 << 16):
        t[i] = t[i >> 1] + (i & 1)
    return t


_POP16 = _popcount_table()


@njit(cache=True)
def popcount(x):
    return (_POP16[x & 0xFFFF] + _POP16[(x >> 16) & 0xFFFF]
            + _POP16[(x >> 32) & 0xFFFF] + _POP16[(x >> 48) & 0xFFFF])


@njit(cache=True)
def _hash(x, cap_mask):
    h = (x * np.int64(-7046029254386353131)) ^ (x >> 29)
    return h & cap_mask


@njit(cache=True)
def _hash_insert(table, key, cap_mask):
    """Insert ``key`` (non-negative) into an open-addressing table; True if new."""
    i = _hash(key, cap_mask)
    while True:
        cur = table[i]
        if cur == _EMPTY_KEY:
            table[i] = key
            return True
        if cur == key:
            return False
        i = (i + 1) & cap_mask


@njit(cache=True)
def _grow(table):
    cap = table.shape[0] * 2
    new = np.full(cap, _EMPTY_KEY, dtype=np.int64)
    cap_mask = cap - 1
    for key in table:
        if key != _EMPTY_KEY:
            _hash_insert(new, key, cap_mask)
    return new


@njit(cache=True)
def _table_keys(table, count):
    out = np.empty(count, dtype=np.int64)
    j = 0
    for key in table:
        if key != _EMPTY_KEY:
            out[j] = key
            j += 1
    return np.sort(out)


DENSE_LIMIT = 22


@njit(cache=True)
def _flag_keys(flags):
    count = 0
    for x in range(flags.shape[0]):
        if flags[x]:
            count += 1
    out = np.empty(count, dtype=np.int64)
    j = 0
    for x in range(flags.shape[0]):
        if flags[x]:
            out[j] = x
            j += 1
    return out


@njit(cache=True)
def maximal_unions(group_masks, c, m):
    """Maximal members of the family of unions of ``c`` distinct groups.

    Built level by level, keeping only maximal sets: a union that is not
    maximal at one level only ever extends to unions that are contained in
    extensions of a maximal one.  Requires ``c <= len(group_masks)``.
    """
    cur = maximal_sets(np.unique(group_masks), m)
    dense = m <= DENSE_LIMIT
    flags = np.zeros((1 << m) if dense else 1, dtype=np.uint8)
    for _ in range(1, c):
        table = np.full(1 if dense else 1024, _EMPTY_KEY, dtype=np.int64)
        count = 0
        for x in cur:
            for g in group_masks:
                y = x | g
                if dense:
                    flags[y] = 1
                elif _hash_insert(table, y, table.shape[0] - 1):
                    count += 1
                    if 2 * count > table.shape[0]:
                        table = _grow(table)
        if dense:
            cand = _flag_keys(flags)
            for y in cand:
                flags[y] = 0
        else:
            cand = _table_keys(table, count)
        cur = maximal_sets(cand, m)
    return cur


@njit(cache=True)
def maximal_sets(masks, m):
    """Members of ``masks`` with no strict superset among ``masks``.

    Output is in ascending integer order.
    """
    n = masks.shape[0]
    if m <= DENSE_LIMIT:
        size = 1 << m
        up = np.zeros(size, dtype=np.uint8)
        for i in range(n):
            up[masks[i]] = 1
        # up[x] = 1 iff some member contains x
        for b in range(m):
            bit = 1 << b
            for x in range(size):
                if not (x & bit) and up[x | bit]:
                    up[x] = 1
        keep = np.empty(n, dtype=np.int64)
        kept = 0
        for i in range(n):
            x = masks[i]
            maximal = True
            for b in range(m):
                bit = 1 << b
                if not (x & bit) and up[x | bit]:
                    maximal = False
                    break
            if maximal:
                keep[kept] = x
                kept += 1
        return np.sort(keep[:kept])
    sizes = np.empty(n, dtype=np.int64)
    for i in range(n):
        sizes[i] = popcount(masks[i])
    order = np.argsort(-sizes, kind="mergesort")
    keep = np.empty(n, dtype=np.int64)
    kept = 0
    for t in range(n):
        x = masks[order[t]]
        covered = False
        for s in range(kept):
            if (x & keep[s]) == x:
                covered = True
                break
        if not covered:
            keep[kept] = x
            kept += 1
    return np.sort(keep[:kept])


@njit(cache=True)
def build_rows(node_masks, clause_vars, clause_false, m):
    """Enumerate, per node, every assignment of the node's variables that
    falsifies none of the clauses lying inside the node.

    Returns ``(rows, offsets)`` in CSR layout; rows of a node are ascending.
    """
    n_nodes = node_masks.shape[0]
    n_cl = clause_vars.shape[0]
    offsets = np.zeros(n_nodes + 1, dtype=np.int64)
    out = np.empty(1024, dtype=np.int64)
    used = 0
    # a clause is checked when its lowest bit (its last variable) is assigned
    low = np.empty(n_cl, dtype=np.int64)
    for c in range(n_cl):
        x = clause_vars[c]
        xl = x & (-x)
        b = 0
        while (np.int64(1) << b) != xl:
            b += 1
        low[c] = b
    by_low = np.argsort(low, kind="mergesort")
    bucket = np.zeros(m + 1, dtype=np.int64)
    for c in range(n_cl):
        bucket[low[c] + 1] += 1
    for b in range(m):
        bucket[b + 1] += bucket[b]
    inside = np.empty(n_cl, dtype=np.int64)
    in_off = np.zeros(m + 1, dtype=np.int64)
    cur = np.empty(2, dtype=np.int64)
    nxt = np.empty(2, dtype=np.int64)
    for nd in range(n_nodes):
        y = node_masks[nd]
        n_in = 0
        for b in range(m):
            in_off[b] = n_in
            if (y >> b) & 1:
                for q in range(bucket[b], bucket[b + 1]):
                    c = by_low[q]
                    if (clause_vars[c] & y) == clause_vars[c]:
                        inside[n_in] = c
                        n_in += 1
        in_off[m] = n_in
        size = np.int64(1) << popcount(y)
        if cur.shape[0] < size:
            cur = np.empty(size, dtype=np.int64)
            nxt = np.empty(size, dtype=np.int64)
        cur[0] = 0
        n_cur = 1
        for b in range(m - 1, -1, -1):
            bit = np.int64(1) << b
            if not (y & bit):
                continue
            q0 = in_off[b]
            q1 = in_off[b + 1]
            n_nxt = 0
            for t in range(n_cur):
                for val in range(2):
                    r = cur[t] | (bit if val else 0)
                    ok = True
                    for q in range(q0, q1):
                        c = inside[q]
                        if (r & clause_vars[c]) == clause_false[c]:
                            ok = False
                            break
                    if ok:
                        nxt[n_nxt] = r
                        n_nxt += 1
            cur, nxt = nxt, cur
            n_cur = n_nxt
            if n_cur == 0:
                break
        while used + n_cur > out.shape[0]:
            bigger = np.empty(out.shape[0] * 2, dtype=np.int64)
            bigger[:used] = out[:used]
            out = bigger
        out[used:used + n_cur] = cur[:n_cur]
        used += n_cur
        offsets[nd + 1] = used
    return out[:used].copy(), offsets


@njit(cache=True)
def pairwise_intersection_sizes(node_masks):
    n = node_masks.shape[0]
    k = np.empty((n, n), dtype=np.int16)
    for i in range(n):
        k[i, i] = popcount(node_masks[i])
        for j in range(i + 1, n):
            s = popcount(node_masks[i] & node_masks[j])
            k[i, j] = s
            k[j, i] = s
    return k


@njit(cache=True)
def distinct_intersections(node_masks, m):
    n = node_masks.shape[0]
    dense = m <= DENSE_LIMIT
    flags = np.zeros((1 << m) if dense else 1, dtype=np.uint8)
    table = np.full(1 if dense else 1024, _EMPTY_KEY, dtype=np.int64)
    count = 0
    for i in range(n):
        for j in range(i + 1, n):
            x = node_masks[i] & node_masks[j]
            if dense:
                flags[x] = 1
            elif _hash_insert(table, x, table.shape[0] - 1):
                count += 1
                if 2 * count > table.shape[0]:
                    table = _grow(table)
    if dense:
        return _flag_keys(flags)
    return _table_keys(table, count)


@njit(cache=True)
def _node_bitsets(node_masks, m):
    """``sets[b]`` = bitset (over node ids) of nodes containing bit ``b``."""
    n = node_masks.shape[0]
    words = (n + 63) // 64
    sets = np.zeros((m, words), dtype=np.uint64)
    for i in range(n):
        y = node_masks[i]
        for b in range(m):
            if (y >> b) & 1:
                sets[b, i // 64] |= np.uint64(1) << np.uint64(i % 64)
    return sets


@njit(cache=True)
def select_separators(node_masks, inter_sizes, candidates, m, keep_all):
    """Pick the separators whose agreement constraints must be enforced.

    A candidate ``S`` (an intersection of two nodes) can be dropped when the
    nodes containing ``S`` are connected by pairs that intersect in more than
    ``|S|`` variables: agreement on those larger overlaps already forces
    agreement on ``S``.  Returns the kept separators and their incidence
    lists in CSR layout.
    """
    n = node_masks.shape[0]
    words = (n + 63) // 64
    sets = _node_bitsets(node_masks, m)
    acc = np.empty(words, dtype=np.uint64)
    members = np.empty(n, dtype=np.int64)
    seen = np.zeros(n, dtype=np.uint8)
    stack = np.empty(n, dtype=np.int64)
    sep = np.empty(candidates.shape[0], dtype=np.int64)
    inc = np.empty(1024, dtype=np.int64)
    inc_off = np.zeros(candidates.shape[0] + 1, dtype=np.int64)
    n_sep = 0
    used = 0
    for t in range(candidates.shape[0]):
        s = candidates[t]
        size = popcount(s)
        for w in range(words):
            acc[w] = ~np.uint64(0)
        for b in range(m):
            if (s >> b) & 1:
                for w in range(words):
                    acc[w] &= sets[b, w]
        d = 0
        for w in range(words):
            x = acc[w]
            while x:
                low = x & (~x + np.uint64(1))
                j = popcount(np.int64(low - np.uint64(1)))
                i = w * 64 + j
                if i < n:
                    members[d] = i
                    d += 1
                x ^= low
        if d < 2:
            continue
        needed = True
        if not keep_all:
            for q in range(d):
                seen[q] = 0
            seen[0] = 1
            top = 1
            stack[0] = 0
            reached = 1
            while top > 0 and reached < d:
                top -= 1
                a = members[stack[top]]
                for q in range(d):
                    if not seen[q] and inter_sizes[a, members[q]] > size:
                        seen[q] = 1
                        stack[top] = q
                        top += 1
                        reached += 1
            needed = reached < d
        if needed:
            sep[n_sep] = s
            while used + d > inc.shape[0]:
                bigger = np.empty(inc.shape[0] * 2, dtype=np.int64)
                bigger[:used] = inc[:used]
                inc = bigger
            inc[used:used + d] = members[:d]
            used += d
            n_sep += 1
            inc_off[n_sep] = used
    return sep[:n_sep].copy(), inc[:used].copy(), inc_off[:n_sep + 1].copy()


@njit(cache=True)
def separator_layout(sep, inc, inc_off, n_nodes, m):
    """Bit positions of each separator (most significant first) and the
    reverse incidence (node -> separators), both in CSR layout."""
    n_sep = sep.shape[0]
    pos_off = np.zeros(n_sep + 1, dtype=np.int64)
    for t in range(n_sep):
        pos_off[t + 1] = pos_off[t] + popcount(sep[t])
    pos = np.empty(pos_off[n_sep], dtype=np.int64)
    for t in range(n_sep):
        j = pos_off[t]
        for b in range(m - 1, -1, -1):
            if (sep[t] >> b) & 1:
                pos[j] = b
                j += 1
    deg = np.zeros(n_nodes + 1, dtype=np.int64)
    for q in range(inc.shape[0]):
        deg[inc[q] + 1] += 1
    for i in range(n_nodes):
        deg[i + 1] += deg[i]
    node_sep = np.empty(inc.shape[0], dtype=np.int64)
    fill = deg[:n_nodes].copy()
    for t in range(n_sep):
        for q in range(inc_off[t], inc_off[t + 1]):
            nd = inc[q]
            node_sep[fill[nd]] = t
            fill[nd] += 1
    return pos, pos_off, node_sep, deg


@njit(cache=True)
def _gather(row, pos, start, stop):
    key = 0
    for t in range(start, stop):
        key = (key << 1) | ((row >> pos[t]) & 1)
    return key


@njit(cache=True)
def propagate(rows, offsets, alive, counts, sep_pos, sep_pos_off,
              inc, inc_off, node_sep, node_sep_off, queue_init, order, full_sweep, stats):
    """Enforce agreement on every queued separator until nothing changes.

    ``alive``/``counts`` are updated in place.  ``stats`` accumulates
    ``[passes, clearings, rows_removed, support_checks, max_pass_checks,
    empty_flag]``.  Separators are processed in the order given by ``order``
    (a rank per separator) within each round.  With ``full_sweep`` every
    round after one that removed something processes all separators, as in a
    plain round-robin sweep.  Returns False when some node ran out of rows.
    """
    n_sep = inc_off.shape[0] - 1
    max_width = 0
    for s in range(n_sep):
        w = sep_pos_off[s + 1] - sep_pos_off[s]
        if w > max_width:
            max_width = w
    cnt = np.zeros(1 << max_width, dtype=np.int64)
    cnt_gen = np.full(1 << max_width, -1, dtype=np.int64)
    seen = np.full(1 << max_width, -1, dtype=np.int64)
    keys = np.empty(rows.shape[0], dtype=np.int64)
    queued = np.zeros(n_sep, dtype=np.uint8)
    current = np.empty(n_sep, dtype=np.int64)
    n_cur = 0
    for t in range(queue_init.shape[0]):
        s = queue_init[t]
        if not queued[s]:
            queued[s] = 1
            current[n_cur] = s
            n_cur += 1
    nxt = np.empty(n_sep, dtype=np.int64)
    gen = 0
    tag = 0
    for nd in range(counts.shape[0]):
        if counts[nd] == 0:
            stats[5] = 1
            return False
    while n_cur > 0:
        stats[0] += 1
        pass_checks = 0
        ranks = np.empty(n_cur, dtype=np.int64)
        for t in range(n_cur):
            ranks[t] = order[current[t]]
        perm = np.argsort(ranks)
        n_nxt = 0
        round_removed = 0
        for t in range(n_cur):
            s = current[perm[t]]
            queued[s] = 0
            stats[1] += 1
            p0 = sep_pos_off[s]
            p1 = sep_pos_off[s + 1]
            gen += 1
            d = inc_off[s + 1] - inc_off[s]
            for q in range(inc_off[s], inc_off[s + 1]):
                nd = inc[q]
                tag += 1
                for r in range(offsets[nd], offsets[nd + 1]):
                    if alive[r]:
                        key = _gather(rows[r], sep_pos, p0, p1)
                        keys[r] = key
                        if seen[key] != tag:
                            seen[key] = tag
                            if cnt_gen[key] != gen:
                                cnt_gen[key] = gen
                                cnt[key] = 0
                            cnt[key] += 1
            for q in range(inc_off[s], inc_off[s + 1]):
                nd = inc[q]
                removed = 0
                for r in range(offsets[nd], offsets[nd + 1]):
                    if alive[r]:
                        pass_checks += 1
                        key = keys[r]
                        if cnt_gen[key] != gen or cnt[key] != d:
                            alive[r] = 0
                            removed += 1
                if removed:
                    counts[nd] -= removed
                    stats[2] += removed
                    round_removed += removed
                    if counts[nd] == 0:
                        stats[3] += pass_checks
                        if pass_checks > stats[4]:
                            stats[4] = pass_checks
                        stats[5] = 1
                        return False
                    for e in range(node_sep_off[nd], node_sep_off[nd + 1]):
                        s2 = node_sep[e]
                        if s2 != s and not queued[s2]:
                            queued[s2] = 1
                            nxt[n_nxt] = s2
                            n_nxt += 1
        stats[3] += pass_checks
        if pass_checks > stats[4]:
            stats[4] = pass_checks
        if full_sweep:
            for s in range(n_sep):
                queued[s] = 0
            n_nxt = 0
            if round_removed:
                for s in range(n_sep):
                    nxt[s] = s
                n_nxt = n_sep
        current, nxt = nxt, current
        n_cur = n_nxt
    return True


@njit(cache=True)
def restrict(node_masks, rows, offsets, alive, counts, var_mask, pattern):
    """Keep only rows agreeing with ``pattern`` on ``var_mask`` in every node
    whose variables include ``var_mask``.  Returns the changed node ids."""
    changed = np.empty(node_masks.shape[0], dtype=np.int64)
    n_changed = 0
    for nd in range(node_masks.shape[0]):
        if (node_masks[nd] & var_mask) != var_mask:
            continue
        removed = 0
        for r in range(offsets[nd], offsets[nd + 1]):
            if alive[r] and (rows[r] & var_mask) != pattern:
                alive[r] = 0
                removed += 1
        if removed:
            counts[nd] -= removed
            changed[n_changed] = nd
            n_changed += 1
    return changed[:n_changed].copy()


@njit(cache=True)
def restrict_touching(node_masks, rows, offsets, alive, counts, var_mask, pattern):
    """Like :func:`restrict` but for every node sharing any variable with
    ``var_mask``: rows must agree with ``pattern`` on the shared part."""
    changed = np.empty(node_masks.shape[0], dtype=np.int64)
    n_changed = 0
    for nd in range(node_masks.shape[0]):
        shared = node_masks[nd] & var_mask
        if shared == 0:
            continue
        want = pattern & shared
        removed = 0
        for r in range(offsets[nd], offsets[nd + 1]):
            if alive[r] and (rows[r] & shared) != want:
                alive[r] = 0
                removed += 1
        if removed:
            counts[nd] -= removed
            changed[n_changed] = nd
            n_changed += 1
    return changed[:n_changed].copy()


@njit(cache=True)
def _advance(idx, i, nt):
    """Move ``idx`` to the smallest combination after every one that agrees
    with it up to position ``i``.  Returns the first changed position, or -1
    when the enumeration is exhausted."""
    c = idx.shape[0]
    while i >= 0 and idx[i] == i + nt - c:
        i -= 1
    if i < 0:
        return -1
    idx[i] += 1
    for j in range(i + 1, c):
        idx[j] = idx[j - 1] + 1
    return i


@njit(cache=True)
def next_open_combination(idx, group_masks, node_masks, rows, offsets, alive, counts):
    """Advance ``idx`` (in place, lexicographic) to the first combination at or
    after it whose value set holds more than one row.

    Only nodes with several live rows can host such a combination, so a
    prefix of groups that fits in no such node rules out all its
    completions.  Returns the id of an open node containing the
    combination's variables, or -1 once the enumeration is exhausted.
    """
    nt = group_masks.shape[0]
    c = idx.shape[0]
    n_open = 0
    open_nodes = np.empty(node_masks.shape[0], dtype=np.int64)
    for nd in range(node_masks.shape[0]):
        if counts[nd] > 1:
            open_nodes[n_open] = nd
            n_open += 1
    if n_open == 0:
        return -1
    prefix = np.zeros(c + 1, dtype=np.int64)
    t = 0
    while True:
        # extend the prefix from level t while it still fits an open node
        failed = -1
        while t < c:
            p = prefix[t] | group_masks[idx[t]]
            fits = False
            for q in range(n_open):
                if (node_masks[open_nodes[q]] & p) == p:
                    fits = True
                    break
            if not fits:
                failed = t
                break
            prefix[t + 1] = p
            t += 1
        if failed >= 0:
            t = _advance(idx, failed, nt)
            if t < 0:
                return -1
            continue
        x = prefix[c]
        for q in range(n_open):
            host = open_nodes[q]
            if (node_masks[host] & x) != x:
                continue
            first = np.int64(-1)
            have = False
            for r in range(offsets[host], offsets[host + 1]):
                if alive[r]:
                    pr = rows[r] & x
                    if not have:
                        first = pr
                        have = True
                    elif pr != first:
                        return host
            break
        t = _advance(idx, c - 1, nt)
        if t < 0:
            return -1
