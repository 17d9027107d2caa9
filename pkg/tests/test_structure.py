import json
import math
import random

import pytest

from pairclean.errors import InstanceTooWide
from pairclean.groups import build_groups
from pairclean.structure import (
    Combination,
    CombinationValueSet,
    build_structure,
    enumerate_combinations,
    induced_value_set,
    union_vars,
)

from conftest import formula, models_over, random_clauses


def by_labels(rs, values):
    out = {}
    for comb, v in zip(rs.combinations, values.per_combination):
        out[frozenset(rs.groups[i].label for i in comb.group_ids)] = v.bitstrings()
    return out


def labels(*names):
    return frozenset("T_" + n for n in names)


def test_example7_combinations(ex7):
    rs = enumerate_combinations(build_groups(ex7), 3)
    got = {frozenset(rs.groups[i].label for i in c.group_ids) for c in rs.combinations}
    assert got == {labels("12", "23", "13"), labels("12", "23", "14"),
                   labels("12", "13", "14"), labels("23", "13", "14")}
    assert [c.group_ids for c in rs.combinations] == [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]


def test_example8_tables(ex7):
    rs, sv = build_structure(ex7)
    t = by_labels(rs, sv)
    assert t[labels("12", "23", "13")] == ["101", "110", "111"]
    assert t[labels("12", "13", "14")] == ["1001", "1011", "1101", "1111"]
    # corrected by exhaustive filtering
    assert t[labels("12", "23", "14")] == ["1011", "1101", "1111"]
    assert t[labels("23", "13", "14")] == ["0101", "1011", "1101", "1111"]


def test_example8_tables_match_independent_filter(ex7):
    from conftest import EXAMPLE7

    rs, sv = build_structure(ex7)
    for comb, v in zip(rs.combinations, sv.per_combination):
        groups = [rs.groups[i] for i in comb.group_ids]
        own = [c for c in EXAMPLE7 if tuple(sorted(abs(x) - 1 for x in c)) in {g.key for g in groups}]
        assert v.bitstrings() == models_over(own, [x + 1 for x in comb.union_vars])


def test_example6_value_set(ex5):
    rs, sv = build_structure(ex5)
    assert len(rs) == 1
    assert sv[0].bitstrings() == ["010", "110"]


def test_union_vars(ex7):
    gi = build_groups(ex7)
    assert union_vars((0, 1, 3), gi) == (0, 1, 2)
    assert union_vars((0, 2, 3), gi) == (0, 1, 2, 3)
    disjoint = build_groups(formula(4, [[1, 2], [3, 4]]))
    assert union_vars(Combination((0, 1), ()), disjoint) == (0, 1, 2, 3)


def test_combination_counts():
    gi = build_groups(formula(6, [[1, 2], [2, 3], [3, 4], [4, 5], [5, 6], [1, 6]]))
    assert len(enumerate_combinations(gi, 3)) == 20
    gi3 = build_groups(formula(4, [[1, 2], [2, 3], [3, 4]]))
    rs = enumerate_combinations(gi3, 3)
    assert len(rs) == 1 and rs.combinations[0].group_ids == (0, 1, 2)
    # fewer groups than the combination size: one combination of everything
    rs = enumerate_combinations(build_groups(formula(3, [[1, 2], [2, 3]])), 3)
    assert len(rs) == 1 and rs.combinations[0].group_ids == (0, 1)


def test_unsat_pair_structure(bx):
    rs, sv = build_structure(bx)
    assert len(rs) == 1 and len(sv[0]) == 0 and sv.is_empty()


def test_single_clause_structure():
    rs, sv = build_structure(formula(2, [[1, 2]]))
    assert sv[0].tuples() == [(0, 1), (1, 0), (1, 1)]


def test_empty_formula_structure():
    from pairclean.formula import Formula

    rs, sv = build_structure(Formula(3))
    assert len(rs) == 0 and not sv.is_empty()


def test_width_guard(monkeypatch):
    f = formula(9, [[1, 2, 3], [4, 5, 6], [7, 8, 9], [1, 4, 7]])
    with pytest.raises(InstanceTooWide):
        build_structure(f, max_width=8)
    monkeypatch.setenv("PAIRCLEAN_MAX_WIDTH", "8")
    with pytest.raises(InstanceTooWide):
        build_structure(f)
    monkeypatch.setenv("PAIRCLEAN_MAX_WIDTH", "12")
    rs, _ = build_structure(f)
    assert len(rs) == 1


def test_shared_positions(ex7):
    rs, _ = build_structure(ex7)
    # (x1,x2,x3) against (x1,x2,x3,x4)
    assert rs.shared(0, 1) == ((0, 0), (1, 1), (2, 2))
    assert rs.shared(1, 0) == ((0, 0), (1, 1), (2, 2))


def test_json_dump(ex7):
    rs, sv = build_structure(ex7)
    data = json.loads(json.dumps(rs.to_json(sv)))
    assert data["combinations"][0] == ["T_12", "T_13", "T_14"]
    assert data["value_sets"][1] == ["101", "110", "111"]


def test_based_value_sets_are_subsets(ex7):
    rs, sv = build_structure(ex7)
    based = [v.with_rows(sorted(v.rows)[:1]) for v in sv.per_combination]
    assert all(b.rows <= v.rows for b, v in zip(based, sv.per_combination))


def test_from_tuples():
    v = CombinationValueSet.from_tuples((0, 1), [(1, 0), (0, 1)])
    assert v.bitstrings() == ["01", "10"]
    with pytest.raises(ValueError):
        CombinationValueSet.from_tuples((0, 1), [(1,)])


@pytest.mark.parametrize("seed", range(25))
def test_induced_sets_satisfy_member_clauses(seed):
    rng = random.Random(seed)
    m, k = rng.randint(4, 7), rng.choice((2, 3))
    cl = random_clauses(rng, m, rng.randint(2, 8), k)
    f = formula(m, cl)
    rs, sv = build_structure(f)
    gi = rs.groups
    assert len(rs) == math.comb(gi.n_t, rs.c)
    for comb, v in zip(rs.combinations, sv.per_combination):
        keys = {gi[i].key for i in comb.group_ids}
        own = [c for c in cl if tuple(sorted(abs(x) - 1 for x in c)) in keys]
        assert v.bitstrings() == models_over(own, [x + 1 for x in comb.union_vars])
        # projection onto every member key stays inside that group's mask
        for i in comb.group_ids:
            g = gi[i]
            pos = [comb.union_vars.index(x) for x in g.key]
            for row in v.tuples():
                local = int("".join(str(row[p]) for p in pos), 2)
                assert g.allowed_mask() >> local & 1
    assert induced_value_set(rs.combinations[0], gi) == sv[0]
