import itertools

import pytest

from qdnet.cnf import (
    EXAMPLE_FORMULA,
    CnfFormula,
    DimacsError,
    evaluate,
    load_dimacs,
    parse_dimacs,
    planted_3sat,
    random_3sat,
    to_dimacs,
)
from qdnet.seeding import derive_rng


def test_example_formula():
    assert EXAMPLE_FORMULA.num_vars == 4
    assert EXAMPLE_FORMULA.num_clauses == 6
    models = [
        bits for bits in itertools.product((0, 1), repeat=4)
        if evaluate(EXAMPLE_FORMULA, bits)
    ]
    assert models == [(1, 1, 1, 1)]


def test_formula_validation():
    with pytest.raises(ValueError, match="num_vars"):
        CnfFormula(num_vars=0, clauses=())
    with pytest.raises(ValueError, match="1-3 literals"):
        CnfFormula(num_vars=4, clauses=((1, 2, 3, 4),))
    with pytest.raises(ValueError, match="out of range"):
        CnfFormula(num_vars=2, clauses=((1, 3),))
    with pytest.raises(ValueError, match="duplicate literal"):
        CnfFormula(num_vars=2, clauses=((1, 1),))
    with pytest.raises(ValueError, match="both"):
        CnfFormula(num_vars=2, clauses=((1, -1),))


def test_evaluate():
    assert evaluate(EXAMPLE_FORMULA, (1, 1, 1, 1))
    assert not evaluate(EXAMPLE_FORMULA, (0, 0, 0, 0))
    assert not evaluate(EXAMPLE_FORMULA, (1, 1, 1, 0))
    with pytest.raises(ValueError, match="length"):
        evaluate(EXAMPLE_FORMULA, (1, 1))
    empty = CnfFormula(num_vars=2, clauses=())
    assert evaluate(empty, (0, 1))


def test_parse_round_trip():
    text = to_dimacs(EXAMPLE_FORMULA)
    parsed = parse_dimacs(text, name=EXAMPLE_FORMULA.name)
    assert parsed == EXAMPLE_FORMULA


def test_parse_tolerant_layout():
    text = """c a comment
c another

p cnf 3 2
1 -2
 3 0
-1
2
3
0
%
"""
    formula = parse_dimacs(text)
    assert formula.num_vars == 3
    assert formula.clauses == ((1, -2, 3), (-1, 2, 3))
    # zero declared clauses is legal and trivially satisfiable
    assert parse_dimacs("p cnf 2 0\n").clauses == ()


def test_parse_errors_carry_line_numbers():
    cases = [
        ("1 2 0\n", "clause before problem line"),
        ("p cnf 2 1\np cnf 2 1\n", "line 2"),
        ("p cnf x 1\n", "non-integer"),
        ("p cnf 2 -1\n", "nonpositive"),
        ("p cnf 0 1\n", "nonpositive"),
        ("p  cnf\n", "malformed problem line"),
        ("p cnf 2 2\n1 0\n", "declares 2 clauses, found 1"),
        ("p cnf 2 1\n1 a 0\n", "bad literal"),
        ("p cnf 2 1\n1 5 0\n", "out of range"),
        ("p cnf 2 1\n0\n", "empty clause"),
        ("p cnf 2 1\n1 0\n%\n2 0\n", "after '%'"),
        ("p cnf 2 1\n1 2\n", "missing terminating 0"),
        ("", "no problem line"),
    ]
    for text, fragment in cases:
        with pytest.raises(DimacsError, match=fragment):
            parse_dimacs(text)


def test_load_dimacs(tmp_path, phi_file):
    formula = load_dimacs(phi_file)
    assert formula.clauses == EXAMPLE_FORMULA.clauses
    assert formula.name == str(phi_file)


def test_random_3sat():
    formula = random_3sat(20, 91, derive_rng(0, "gen"))
    assert formula.num_vars == 20
    assert formula.num_clauses == 91
    assert all(len(c) == 3 for c in formula.clauses)
    again = random_3sat(20, 91, derive_rng(0, "gen"))
    assert formula == again
    with pytest.raises(ValueError):
        random_3sat(2, 5, derive_rng(0, "gen"))


def test_planted_3sat_satisfiable():
    for k in range(50):
        formula, model = planted_3sat(20, 91, derive_rng(0, "plant", k))
        assert formula.num_clauses == 91
        assert evaluate(formula, model)


def test_planted_3sat_deterministic():
    a, model_a = planted_3sat(12, 40, derive_rng(1, "plant"), name="x")
    b, model_b = planted_3sat(12, 40, derive_rng(1, "plant"), name="x")
    assert a == b and model_a == model_b
    assert a.name == "x"
