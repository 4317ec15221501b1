import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tensorcount.errors import (
    InvalidWeightLine,
    LiteralOutOfRange,
    MalformedHeader,
    TooManyVariables,
    UnterminatedClause,
)
from tensorcount.formula import (
    CnfFormula,
    WeightFunction,
    brute_force_count,
    clause_satisfied,
    parse_dimacs,
    serialize_dimacs,
)

EXAMPLE4 = """c (w or x or -y) and (w or y or z) and (-x or -y) and (-y or -z)
p cnf 4 4
1 2 -3 0
1 3 4 0
-2 -3 0
-3 -4 0
"""


class TestParsing:
    def test_basic(self):
        f, w = parse_dimacs(EXAMPLE4)
        assert f.num_vars == 4
        assert f.clauses == ((1, 2, -3), (1, 3, 4), (-2, -3), (-3, -4))
        assert w.weights == {}

    def test_bytes_input(self):
        f, _ = parse_dimacs(EXAMPLE4.encode())
        assert f.num_vars == 4

    def test_cachet_weight_line(self):
        _, w = parse_dimacs("p cnf 1 1\nw 1 0.3\n1 0\n")
        w0, w1 = w.pair(1)
        assert math.isclose(w0, 0.7) and w1 == 0.3

    def test_two_value_weight_line(self):
        _, w = parse_dimacs("p cnf 1 1\nw 1 2.5 -0.5\n1 0\n")
        assert w.pair(1) == (2.5, -0.5)

    def test_default_weights_are_unit(self):
        _, w = parse_dimacs("p cnf 2 1\n1 2 0\n")
        assert w.pair(1) == (1.0, 1.0)
        assert w.pair(2) == (1.0, 1.0)

    def test_clause_spanning_lines(self):
        f, _ = parse_dimacs("p cnf 3 1\n1 2\n3 0\n")
        assert f.clauses == ((1, 2, 3),)

    def test_tautology_dropped(self):
        f, _ = parse_dimacs("p cnf 2 2\n1 -1 2 0\n1 2 0\n")
        assert f.clauses == ((1, 2),)

    def test_duplicate_literal_merged(self):
        f, _ = parse_dimacs("p cnf 2 1\n1 1 2 0\n")
        assert f.clauses == ((1, 2),)

    def test_percent_and_comment_lines_ignored(self):
        f, _ = parse_dimacs("c hi\np cnf 1 1\n%\n1 0\n%\n0\n")
        assert f.clauses[0] == (1,)

    def test_missing_header(self):
        with pytest.raises(MalformedHeader):
            parse_dimacs("1 2 0\n")

    def test_bad_header(self):
        with pytest.raises(MalformedHeader):
            parse_dimacs("p sat 3 2\n")

    def test_literal_out_of_range(self):
        with pytest.raises(LiteralOutOfRange):
            parse_dimacs("p cnf 2 1\n3 0\n")

    def test_unterminated_clause(self):
        with pytest.raises(UnterminatedClause):
            parse_dimacs("p cnf 2 1\n1 2\n")

    def test_weight_for_unknown_variable(self):
        with pytest.raises(InvalidWeightLine):
            parse_dimacs("p cnf 1 0\nw 2 0.5\n")

    def test_bad_weight_arity(self):
        with pytest.raises(InvalidWeightLine):
            parse_dimacs("p cnf 1 0\nw 1 0.1 0.2 0.3\n")

    def test_non_finite_weight(self):
        with pytest.raises(InvalidWeightLine):
            parse_dimacs("p cnf 1 0\nw 1 inf\n")


class TestFormulaInvariants:
    def test_out_of_range_clause_literal(self):
        with pytest.raises(LiteralOutOfRange):
            CnfFormula(2, ((1, 5),))

    def test_zero_literal(self):
        with pytest.raises(LiteralOutOfRange):
            CnfFormula(2, ((1, 0),))

    def test_complementary_pair_rejected(self):
        with pytest.raises(ValueError):
            CnfFormula(2, ((1, -1),))


class TestBruteForce:
    def test_empty_formula(self):
        assert brute_force_count(CnfFormula(0, ()), WeightFunction({})) == 1.0

    def test_free_variables_double(self):
        # no clauses: each unit-weight variable contributes a factor of 2
        assert brute_force_count(CnfFormula(3, ()), WeightFunction({})) == 8.0

    def test_unit_clause(self):
        f = CnfFormula(1, ((1,),))
        assert brute_force_count(f, WeightFunction({1: (0.3, 0.7)})) == 0.7

    def test_unsatisfiable(self):
        f = CnfFormula(1, ((1,), (-1,)))
        assert brute_force_count(f, WeightFunction({})) == 0.0

    def test_example4_unit_count(self):
        f, w = parse_dimacs(EXAMPLE4)
        assert brute_force_count(f, w) == 7.0

    def test_matches_naive_enumeration(self, rng):
        # cross-check the vectorized oracle against a literal transcription
        # of the defining sum
        import itertools

        from tests.conftest import random_cnf, random_weights

        for _ in range(20):
            nv = rng.randint(1, 6)
            f = random_cnf(rng, nv, rng.randint(0, 8), clause_size=rng.randint(1, 3))
            w = random_weights(rng, nv)
            expected = 0.0
            for bits in itertools.product((0, 1), repeat=nv):
                tau = dict(zip(range(1, nv + 1), bits))
                if all(clause_satisfied(c, tau) for c in f.clauses):
                    prod = 1.0
                    for v in range(1, nv + 1):
                        prod *= w.pair(v)[tau[v]]
                    expected += prod
            assert math.isclose(brute_force_count(f, w), expected,
                                rel_tol=1e-12, abs_tol=1e-12)

    def test_variable_limit(self):
        with pytest.raises(TooManyVariables):
            brute_force_count(CnfFormula(26, ()), WeightFunction({}))


@settings(max_examples=50, deadline=None)
@given(st.data())
def test_serialize_parse_round_trip(data):
    nv = data.draw(st.integers(1, 8))
    n_clauses = data.draw(st.integers(0, 6))
    clauses = []
    for _ in range(n_clauses):
        size = data.draw(st.integers(1, min(3, nv)))
        vs = data.draw(
            st.lists(st.integers(1, nv), min_size=size, max_size=size, unique=True)
        )
        signs = data.draw(st.lists(st.booleans(), min_size=size, max_size=size))
        clauses.append(tuple(v if s else -v for v, s in zip(vs, signs)))
    f = CnfFormula(nv, tuple(clauses))
    w = WeightFunction(
        {
            v: (data.draw(st.floats(-2, 2)), data.draw(st.floats(-2, 2)))
            for v in range(1, nv + 1)
        }
    )
    f2, w2 = parse_dimacs(serialize_dimacs(f, w))
    assert f2 == f
    assert w2 == w
