"""
Tests for the bounded brute-force oracle.
"""
from wordeq_rmc.engine import verify_model
from wordeq_rmc.models import And, EqLit, LenAtom, LenLit, OracleOutcome, Problem, WordEquation
from wordeq_rmc.oracle import brute_force, iter_assignments, words_up_to
from wordeq_rmc.symbols import const, var

a, b = const("a"), const("b")
x, y = var("x"), var("y")


def lit(lhs, rhs, positive=True) -> EqLit:
    return EqLit(equation=WordEquation(lhs=tuple(lhs), rhs=tuple(rhs)), positive=positive)


class TestEnumeration:
    """Test the canonical assignment order."""

    def test_words_up_to(self):
        """Test shortest words come first, then lexicographic order."""
        assert words_up_to("ba", 2) == ["", "a", "b", "aa", "ab", "ba", "bb"]

    def test_grouped_by_longest_value(self):
        """Test assignments are grouped by the length of their longest value."""
        values = list(iter_assignments(2, "a", 1))
        assert values == [("", ""), ("", "a"), ("a", ""), ("a", "a")]

    def test_larger_bound_extends_order(self):
        """Test raising the bound only appends assignments."""
        short = list(iter_assignments(2, "ab", 1))
        longer = list(iter_assignments(2, "ab", 2))
        assert longer[:len(short)] == short
        assert len(set(longer)) == len(longer) == 7 ** 2

    def test_no_variables(self):
        """Test the single empty assignment."""
        assert list(iter_assignments(0, "ab", 3)) == [()]


class TestBruteForce:
    """Test model search."""

    def test_unsat_running_example(self):
        """Test xay = yx has no model with values up to length 4."""
        result = brute_force(Problem(formula=lit([x, a, y], [y, x])), 4)
        assert result.outcome == OracleOutcome.NO_MODEL
        assert result.model is None
        assert result.nodes == 5 ** 2

    def test_first_model(self):
        """Test the first model in canonical order is returned."""
        result = brute_force(Problem(formula=lit([x, y], [a, x])), 3)
        assert result.outcome == OracleOutcome.SAT
        assert result.model == {"x": "", "y": "a"}

    def test_model_verifies(self):
        """Test found models satisfy word and length constraints."""
        formula = And(args=(lit([x, b], [b, x]), LenLit(atom=LenAtom(coefficients={"x": -1}, bound=-2))))
        result = brute_force(Problem(alphabet=("a", "b"), formula=formula), 3)
        assert result.outcome == OracleOutcome.SAT
        assert result.model == {"x": "bb"}
        assert verify_model(formula, result.model)

    def test_node_limit(self):
        """Test the search stops at the node limit."""
        result = brute_force(Problem(formula=lit([x, a, y], [y, x])), 4, node_limit=10)
        assert result.outcome == OracleOutcome.CAP
        assert result.nodes == 10

    def test_declared_alphabet(self):
        """Test declared constants take part in the search."""
        result = brute_force(Problem(alphabet=("b",), formula=lit([x], [y], False)), 1)
        assert result.outcome == OracleOutcome.SAT
        assert result.model == {"x": "", "y": "b"}
