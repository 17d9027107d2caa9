import random

import pytest

from pairclean.errors import OracleCapExceeded
from pairclean.formula import Formula, evaluate
from pairclean.oracle import brute_force, dpll

from conftest import all_models, formula, random_clauses


def test_example1(ex1):
    res = brute_force(ex1, enumerate=True)
    assert res.satisfiable and (1, 1, 1, 1) in res.models
    assert res.assignments_checked == 16
    assert dpll(ex1)


def test_unsat_pair(bx):
    res = brute_force(bx, enumerate=True)
    assert not res.satisfiable and res.models == []
    assert not dpll(bx)


def test_empty_formula():
    res = brute_force(Formula(2), enumerate=True)
    assert len(res.models) == 4
    assert dpll(Formula(2))


def test_example7(ex7):
    assert brute_force(ex7).satisfiable and dpll(ex7)


def test_cap():
    f = formula(30, [[1, 2, 3]])
    with pytest.raises(OracleCapExceeded):
        brute_force(f)
    assert brute_force(f, cap=30).satisfiable
    assert dpll(f)


def test_early_stop_counts():
    res = brute_force(formula(3, [[1, 2, 3]]))
    # 000 fails, 001 is the first model
    assert res.satisfiable and res.assignments_checked == 2 and res.models is None


@pytest.mark.parametrize("seed", range(80))
def test_agreement(seed):
    rng = random.Random(seed)
    k = rng.choice((2, 3, 4))
    m = rng.randint(k, 12)
    cl = random_clauses(rng, m, rng.randint(1, 6 * m), k)
    f = formula(m, cl)
    res = brute_force(f, enumerate=True)
    assert res.models == all_models(m, cl)
    assert all(evaluate(f, a) for a in res.models)
    assert dpll(f) == res.satisfiable


def test_planted_dpll():
    rng = random.Random(9)
    m = 40
    hidden = [rng.randrange(2) for _ in range(m)]
    cl = []
    while len(cl) < 150:
        c = random_clauses(rng, m, 1, 3)[0]
        if any((hidden[abs(l) - 1] == 1) == (l > 0) for l in c):
            cl.append(c)
    assert dpll(formula(m, cl))


def test_oracle_is_independent():
    import ast
    from pathlib import Path

    import pairclean.oracle as mod

    tree = ast.parse(Path(mod.__file__).read_text())
    imported = {n.module for n in ast.walk(tree) if isinstance(n, ast.ImportFrom) and n.level}
    assert imported <= {"errors", "formula"}
