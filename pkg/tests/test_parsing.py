"""
Tests for the native and SMT-LIB input formats.
"""
import pytest

from wordeq_rmc.errors import InputError, ParseError, UndeclaredSymbolError, UnsupportedFeatureError
from wordeq_rmc.models import TRUE, And, BoolConst, EqLit, LenAtom, LenLit, Not, Or, WordEquation
from wordeq_rmc.parsing import length_relation, parse_file, parse_native, parse_smtlib
from wordeq_rmc.symbols import const, var

a, b = const("a"), const("b")
x, y = var("x"), var("y")

RUNNING_EXAMPLE = """\
; xay = yx with |x| = |y| + 1
alphabet: a b
vars: x y
x a y = y x
len: |x| = |y| + 1
"""

RUNNING_EXAMPLE_SMT = """\
(declare-fun x () String)
(declare-fun y () String)
(assert (= (str.++ x "a" y) (str.++ y x)))
(assert (= (str.len x) (+ (str.len y) 1)))
(check-sat)
"""


def lit(lhs, rhs, positive=True) -> EqLit:
    return EqLit(equation=WordEquation(lhs=tuple(lhs), rhs=tuple(rhs)), positive=positive)


def atom(coefficients, bound) -> LenLit:
    return LenLit(atom=LenAtom(coefficients=coefficients, bound=bound))


X_IS_Y_PLUS_ONE = And(args=(atom({"x": 1, "y": -1}, 1), atom({"x": -1, "y": 1}, -1)))


class TestLengthRelation:
    """Test relations normalised to ``<=`` atoms."""

    def test_relations(self):
        """Test each operator on |x| - 3."""
        assert length_relation({"x": 1}, -3, "<=") == atom({"x": 1}, 3)
        assert length_relation({"x": 1}, -3, "<") == atom({"x": 1}, 2)
        assert length_relation({"x": 1}, -3, ">=") == atom({"x": -1}, -3)
        assert length_relation({"x": 1}, -3, ">") == atom({"x": -1}, -4)
        assert isinstance(length_relation({"x": 1}, -3, "!="), Or)

    def test_constant_relation(self):
        """Test relations without variables fold to constants."""
        assert length_relation({"x": 0}, -1, "<=") == BoolConst(value=True)
        assert length_relation({}, 2, "=") == BoolConst(value=False)


class TestNative:
    """Test the native line format."""

    def test_running_example(self):
        """Test declarations, an equation and a length line."""
        problem = parse_native(RUNNING_EXAMPLE)
        assert problem.alphabet == ("a", "b")
        assert problem.variables == ("x", "y")
        assert problem.formula == And(args=(lit([x, a, y], [y, x]), X_IS_Y_PLUS_ONE))

    def test_repeated_variable(self):
        """Test a variable may occur several times."""
        problem = parse_native("vars: x\nx = x x x x\n")
        assert problem.formula == lit([x], [x, x, x, x])

    def test_empty_word(self):
        """Test ε and eps denote the empty term."""
        problem = parse_native("vars: x\nx = ε\nx x = eps\n")
        assert problem.formula == And(args=(lit([x], []), lit([x, x], [])))

    def test_connectives(self):
        """Test negation, disjunction, inequations and grouping."""
        problem = parse_native("alphabet: a\nvars: x y\n!(x = a) | y != x & x = a\n")
        expected = Or(args=(Not(arg=lit([x], [a])), And(args=(lit([y], [x], False), lit([x], [a])))))
        assert problem.formula == expected

    def test_scaled_length(self):
        """Test coefficients and constants on both sides."""
        problem = parse_native("vars: x y\nlen: 2|x| + |y| <= 5\nlen: |x| > 3\n")
        assert problem.formula == And(args=(atom({"x": 2, "y": 1}, 5), atom({"x": -1}, -4)))

    def test_empty_input(self):
        """Test a file with only comments is trivially true."""
        assert parse_native("; nothing here\n").formula == TRUE

    def test_undeclared_symbol(self):
        """Test the error reports line and column."""
        with pytest.raises(UndeclaredSymbolError) as excinfo:
            parse_native("alphabet: a\nvars: x\nx = a z\n")
        assert excinfo.value.line == 3
        assert excinfo.value.column == 7
        assert "line 3, column 7" in str(excinfo.value)

    def test_undeclared_length_variable(self):
        """Test length lines only use declared variables."""
        with pytest.raises(UndeclaredSymbolError):
            parse_native("vars: x\nlen: |z| <= 1\n")

    def test_missing_relation(self):
        """Test a term without '=' is rejected."""
        with pytest.raises(ParseError):
            parse_native("alphabet: a\nvars: x\nx a\n")

    def test_long_constant(self):
        """Test constants must be single characters."""
        with pytest.raises(ParseError):
            parse_native("alphabet: ab\n")

    def test_clash(self):
        """Test a symbol cannot be both constant and variable."""
        with pytest.raises(ParseError):
            parse_native("alphabet: a\nvars: a\n")

    def test_parse_errors_are_value_errors(self):
        """Test callers may catch input errors as ValueError."""
        with pytest.raises(ValueError):
            parse_native("vars: x\nx = (x\n")


class TestSmtLib:
    """Test the SMT-LIB string fragment."""

    def test_running_example(self):
        """Test the SMT-LIB form agrees with the native one."""
        problem = parse_smtlib(RUNNING_EXAMPLE_SMT)
        assert problem.alphabet == ("a",)
        assert problem.variables == ("x", "y")
        assert problem.formula == parse_native(RUNNING_EXAMPLE).formula

    def test_trivial_equation(self):
        """Test (= x x) is kept as an equation."""
        problem = parse_smtlib('(declare-fun x () String)\n(assert (= x x))\n')
        assert problem.formula == lit([x], [x])

    def test_boolean_structure(self):
        """Test not, or and implication."""
        text = ('(declare-fun x () String)\n(declare-fun y () String)\n'
                '(assert (=> (= x "a") (not (= y "b"))))\n')
        problem = parse_smtlib(text)
        expected = Or(args=(Not(arg=lit([x], [a])), Not(arg=lit([y], [b]))))
        assert problem.formula == expected
        assert problem.alphabet == ("a", "b")

    def test_no_assertions(self):
        """Test an empty script is trivially true."""
        assert parse_smtlib("(declare-fun x () String)\n(check-sat)\n").formula == TRUE

    def test_unsupported_operator(self):
        """Test operators outside the fragment are reported."""
        text = '(declare-fun x () String)\n(declare-fun y () String)\n(assert (= x (str.replace y "a" "b")))\n'
        with pytest.raises(UnsupportedFeatureError):
            parse_smtlib(text)

    def test_undeclared(self):
        """Test undeclared symbols are parse errors."""
        with pytest.raises(ParseError):
            parse_smtlib('(assert (= undeclared_w "a"))\n')


class TestParseFile:
    """Test format detection."""

    def test_suffix(self, tmp_path):
        """Test .smt2 files use the SMT-LIB parser."""
        path = tmp_path / "example.smt2"
        path.write_text(RUNNING_EXAMPLE_SMT, encoding="utf-8")
        assert parse_file(path).alphabet == ("a",)

    def test_native(self, tmp_path):
        """Test other files default to the native format."""
        path = tmp_path / "example.eq"
        path.write_text(RUNNING_EXAMPLE, encoding="utf-8")
        assert parse_file(path).alphabet == ("a", "b")

    def test_first_token(self, tmp_path):
        """Test a leading SMT-LIB command selects SMT-LIB without a suffix."""
        path = tmp_path / "example"
        path.write_text("; header\n" + RUNNING_EXAMPLE_SMT, encoding="utf-8")
        assert parse_file(path).variables == ("x", "y")

    def test_native_group_first(self, tmp_path):
        """Test a parenthesized native constraint on the first line stays native."""
        path = tmp_path / "example"
        path.write_text("(x = a) | (x = b)\nalphabet: a b\nvars: x\n", encoding="utf-8")
        problem = parse_file(path)
        assert problem.variables == ("x",)
        assert isinstance(problem.formula, Or)

    def test_invalid_utf8(self, tmp_path):
        """Test undecodable files raise an input error with the byte offset."""
        path = tmp_path / "example.eq"
        path.write_bytes(b"alphabet: a\n\xff")
        with pytest.raises(InputError, match="offset 12"):
            parse_file(path)
