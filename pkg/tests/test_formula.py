import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairclean.errors import DimacsError
from pairclean.formula import (
    Clause,
    Formula,
    Literal,
    assignment_to_dimacs,
    evaluate,
    falsifying_local_assignment,
    parse_dimacs,
    write_dimacs,
)

from conftest import B_CLAUSES, EXAMPLE7, formula


def test_parse_example1_shape():
    f = parse_dimacs("p cnf 4 2\n1 2 3 0\n-1 3 -4 0")
    assert (f.m, f.n, f.k) == (4, 2, 3)
    assert f.clauses[1].vars == (0, 2, 3)
    assert f.clauses[1].sigmas == (1, 0, 1)


def test_parse_single_clause():
    f = parse_dimacs("p cnf 2 1\n1 2 0\n")
    assert (f.m, f.n, f.k) == (2, 1, 2)


def test_parse_sorts_literals_and_keeps_duplicates():
    f = parse_dimacs("c hi\np cnf 3 2\n3 -1 2 0\n2 3 -1 0\n")
    assert f.clauses[0] == f.clauses[1]
    assert f.clauses[0].vars == (0, 1, 2)
    assert f.n == 2


def test_parse_multiline_and_percent_terminator():
    f = parse_dimacs("p cnf 3 2\n1 2\n 3 0 -1\n-2 3 0\n%\n0\n")
    assert f.n == 2
    assert f.clauses[1].to_dimacs_list() == [-1, -2, 3]


@pytest.mark.parametrize(
    "text, needle",
    [
        ("p cnf 2 1\n1 -1 0", "repeats a variable"),
        ("p cnf 2 2\n1 2 0", "announces 2 clauses"),
        ("p cnf 2 1\n1 3 0", "exceeds variable count"),
        ("p cnf 3 2\n1 2 0\n1 2 3 0", "uniform width"),
        ("p cnf 2 1\n0\n", "empty clause"),
        ("1 2 0\n", "before the problem line"),
        ("c nothing\n", "missing"),
        ("p cnf 2 1\np cnf 2 1\n1 2 0", "second problem line"),
        ("p cnf 2 1\n1 x 0", "bad literal"),
    ],
)
def test_parse_errors(text, needle):
    with pytest.raises(DimacsError, match=needle):
        parse_dimacs(text)


def test_parse_error_names_line():
    with pytest.raises(DimacsError) as exc:
        parse_dimacs("p cnf 3 2\n1 2 0\n3 -3 0\n")
    assert exc.value.line == 3


def test_write_round_trip_examples():
    for m, cl in ((4, [[1, 2, 3], [-1, 3, -4]]), (4, EXAMPLE7)):
        f = formula(m, cl)
        assert parse_dimacs(write_dimacs(f)) == f


def test_write_empty_formula():
    assert write_dimacs(Formula(3)).strip() == "p cnf 3 0"
    assert parse_dimacs(write_dimacs(Formula(3))) == Formula(3)


def test_evaluate_worked_examples(ex1):
    assert evaluate(ex1, (1, 1, 1, 1)) == 1
    b = formula(2, B_CLAUSES)
    assert all(evaluate(b, a) == 0 for a in itertools.product((0, 1), repeat=2))


def test_evaluate_all_positive_under_ones():
    f = formula(5, [[1, 2, 3], [2, 4, 5], [1, 3, 5]])
    assert evaluate(f, (1,) * 5) == 1


def test_evaluate_length_mismatch(ex1):
    with pytest.raises(ValueError):
        evaluate(ex1, (1, 1))


def test_falsifying_local_assignment():
    assert falsifying_local_assignment(Clause.from_dimacs([1, 2, 3])) == (0, 0, 0)
    assert falsifying_local_assignment(Clause.from_dimacs([-1, 2, -3])) == (1, 0, 1)
    assert falsifying_local_assignment(Clause.from_dimacs([-1, -2])) == (1, 1)


def test_literal_conventions():
    lit = Literal.from_dimacs(-3)
    assert (lit.var, lit.sigma) == (2, 1)
    assert lit.to_dimacs() == -3
    assert lit.satisfied_by(0) and not lit.satisfied_by(1)
    with pytest.raises(ValueError):
        Literal(0, 2)


def test_formula_rejects_mixed_widths():
    with pytest.raises(ValueError):
        Formula(3, (Clause.from_dimacs([1, 2]), Clause.from_dimacs([1, 2, 3])))


def test_assignment_to_dimacs():
    assert assignment_to_dimacs((1, 0, 1)) == "v 1 -2 3 0"


clause_lists = st.integers(2, 7).flatmap(
    lambda m: st.tuples(
        st.just(m),
        st.integers(2, min(m, 4)).flatmap(
            lambda k: st.lists(
                st.tuples(
                    st.permutations(range(1, m + 1)).map(lambda p: p[:k]),
                    st.lists(st.booleans(), min_size=k, max_size=k),
                ).map(lambda t: [v if s else -v for v, s in zip(*t)]),
                max_size=12,
            )
        ),
    )
)


@settings(max_examples=150, deadline=None)
@given(clause_lists)
def test_round_trip_property(data):
    m, cl = data
    f = formula(m, cl)
    assert parse_dimacs(write_dimacs(f)) == f
    # normalization is idempotent
    assert formula(m, [c.to_dimacs_list() for c in f.clauses]) == f


@settings(max_examples=100, deadline=None)
@given(clause_lists, st.data())
def test_evaluate_matches_falsifying_rows(data, draw):
    m, cl = data
    f = formula(m, cl)
    a = tuple(draw.draw(st.lists(st.integers(0, 1), min_size=m, max_size=m)))
    expect = all(tuple(a[v] for v in c.vars) != falsifying_local_assignment(c) for c in f.clauses)
    assert evaluate(f, a) == int(expect)
