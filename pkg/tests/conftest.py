import itertools
import random

import pytest

from pairclean.formula import Formula

EXAMPLE1 = [[1, 2, 3], [-1, 3, -4]]
B_CLAUSES = [[1, 2], [-1, 2], [1, -2], [-1, -2]]
EXAMPLE5 = [[1, 2], [-1, 2], [2, 3], [-2, -3]]
EXAMPLE7 = [[1, 2], [1, -2], [2, 3], [1, -3], [1, 4], [-1, 4]]


def formula(m, clauses):
    return Formula.from_dimacs_clauses(m, clauses)


@pytest.fixture
def ex1():
    return formula(4, EXAMPLE1)


@pytest.fixture
def bx():
    return formula(2, B_CLAUSES)


@pytest.fixture
def ex5():
    return formula(3, EXAMPLE5)


@pytest.fixture
def ex7():
    return formula(4, EXAMPLE7)


def satisfies(clauses, a):
    """``a`` maps 1-based variable -> bit; clauses are DIMACS lists."""
    return all(any((a[abs(l)] == 1) == (l > 0) for l in c) for c in clauses)


def models_over(clauses, vars_):
    """All assignments of ``vars_`` (sorted, 1-based) satisfying every
    clause whose variables lie inside ``vars_``; rows as bit strings."""
    inside = [c for c in clauses if all(abs(l) in vars_ for l in c)]
    out = []
    for bits in itertools.product((0, 1), repeat=len(vars_)):
        a = dict(zip(vars_, bits))
        if satisfies(inside, a):
            out.append("".join(map(str, bits)))
    return out


def all_models(m, clauses):
    return [bits for bits in itertools.product((0, 1), repeat=m)
            if satisfies(clauses, dict(zip(range(1, m + 1), bits)))]


def random_clauses(rng, m, n, k):
    cl = []
    for _ in range(n):
        vs = rng.sample(range(1, m + 1), k)
        cl.append([v if rng.random() < 0.5 else -v for v in vs])
    return cl


def random_formula(seed, m, n, k):
    return formula(m, random_clauses(random.Random(seed), m, n, k))


# filled by test_acceptance.py, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
