"""
Tests for the front-end rewrites.
"""
import random

import pytest

from wordeq_rmc.engine import verify_model
from wordeq_rmc.errors import CnfCapExceeded, UnsupportedFeatureError
from wordeq_rmc.models import (FALSE, TRUE, And, BoolConst, EqLit, EquationSystem, LenAtom, LenLit, Not, Or,
                               WordEquation)
from wordeq_rmc.oracle import iter_assignments
from wordeq_rmc.preprocess import (FreshNames, eliminate_inequalities, is_cubic, is_quadratic, occurrences,
                                   quartic_variable, split_constraints, to_cnf, to_cubic, to_nnf)
from wordeq_rmc.symbols import const, var

a, b = const("a"), const("b")
x, y = var("x"), var("y")


def eq(lhs, rhs) -> WordEquation:
    return WordEquation(lhs=tuple(lhs), rhs=tuple(rhs))


def lit(lhs, rhs, positive=True) -> EqLit:
    return EqLit(equation=eq(lhs, rhs), positive=positive)


def length(coefficients, bound) -> LenLit:
    return LenLit(atom=LenAtom(coefficients=coefficients, bound=bound))


def satisfiable_up_to(formula, variables, alphabet, max_len) -> bool:
    return any(verify_model(formula, dict(zip(variables, values)))
               for values in iter_assignments(len(variables), alphabet, max_len))


class TestNnf:
    """Test negation normal form."""

    def test_double_negation(self):
        """Test ¬¬(α=β) becomes α=β."""
        assert to_nnf(Not(arg=Not(arg=lit([x], [a])))) == lit([x], [a])

    def test_de_morgan(self):
        """Test negation is pushed through conjunctions."""
        formula = Not(arg=And(args=(lit([x], [a]), lit([y], [b]))))
        assert to_nnf(formula) == Or(args=(lit([x], [a], False), lit([y], [b], False)))

    def test_length_atoms_absorb_negation(self):
        """Test a negated length atom flips its inequality."""
        negated = to_nnf(Not(arg=length({"x": 1}, 2)))
        assert negated == length({"x": -1}, -3)

    def test_constants(self):
        """Test negated Boolean constants."""
        assert to_nnf(Not(arg=TRUE)) == FALSE


class TestSplit:
    """Test separating word and length constraints."""

    def test_split(self):
        """Test top-level conjuncts are sorted by kind."""
        words, lengths = split_constraints(And(args=(lit([x], [a]), length({"x": 1}, 1))))
        assert words == lit([x], [a])
        assert lengths == length({"x": 1}, 1)

    def test_no_length(self):
        """Test the length part defaults to true."""
        _, lengths = split_constraints(lit([x], [a]))
        assert lengths == TRUE

    def test_mixed_disjunction(self):
        """Test a disjunction mixing both kinds is rejected."""
        with pytest.raises(UnsupportedFeatureError):
            split_constraints(Or(args=(lit([x], [a]), length({"x": 1}, 1))))


class TestFreshNames:
    """Test deterministic fresh variables."""

    def test_primes(self):
        """Test the prime sequence skips taken names."""
        names = FreshNames(["x", "x″"])
        assert names.fresh("x").name == "x′"
        assert names.fresh("x").name == "x‴"
        assert names.fresh("x′").name == "x′′′′"
        assert names.fresh("y").name == "y′"


class TestInequalities:
    """Test inequation elimination."""

    def test_unchanged_without_inequations(self):
        """Test formulas without inequations are kept."""
        formula = And(args=(lit([x], [a]), lit([y], [b])))
        assert eliminate_inequalities(formula, [a, b], FreshNames(["x", "y"])) == formula

    def test_shape(self):
        """Test x ≠ a over {a, b} expands to prefix and mismatch cases."""
        result = eliminate_inequalities(lit([x], [a], False), [a, b], FreshNames(["x"]))
        assert isinstance(result, Or)
        assert len(result.args) == 6
        assert sum(isinstance(arg, And) for arg in result.args) == 2

    def test_empty_alphabet(self):
        """Test an inequation over an empty alphabet is false."""
        assert eliminate_inequalities(lit([x], [], False), [], FreshNames(["x"])) == FALSE

    @pytest.mark.parametrize("lhs,rhs", [([x], [a]), ([x, a], [a, x]), ([x], [y]), ([x, y], [])])
    def test_equisatisfiable(self, lhs, rhs):
        """Test elimination preserves satisfiability on small instances."""
        original = lit(lhs, rhs, False)
        names = FreshNames(["x", "y"])
        rewritten = eliminate_inequalities(original, [a, b], names)
        variables = sorted(names.taken)
        assert satisfiable_up_to(original, ["x", "y"], "ab", 2)
        assert satisfiable_up_to(rewritten, variables, "ab", 2)

    def test_unsatisfiable_inequation(self):
        """Test x ≠ x stays unsatisfiable."""
        names = FreshNames(["x"])
        rewritten = eliminate_inequalities(lit([x], [x], False), [a], names)
        assert not satisfiable_up_to(rewritten, sorted(names.taken), "a", 2)


class TestCnf:
    """Test CNF conversion."""

    def test_conjunction(self):
        """Test a conjunction of equations gives singleton clauses."""
        system = to_cnf(And(args=(lit([x], [a]), lit([y], [b]))))
        assert system.clauses == ((eq([x], [a]),), (eq([y], [b]),))

    def test_distribution(self):
        """Test (p ∧ q) ∨ r becomes (p ∨ r) ∧ (q ∨ r)."""
        p, q, r = lit([x], [a]), lit([y], [b]), lit([x], [y])
        system = to_cnf(Or(args=(And(args=(p, q)), r)))
        assert system.clauses == ((p.equation, r.equation), (q.equation, r.equation))

    def test_false(self):
        """Test an unsatisfiable formula gives None."""
        assert to_cnf(FALSE) is None
        assert to_cnf(And(args=(lit([x], [a]), BoolConst(value=False)))) is None

    def test_true(self):
        """Test a tautology gives the solved equation."""
        assert to_cnf(TRUE).clauses == ((WordEquation(),),)
        assert to_cnf(lit([x], [x])).clauses == ((WordEquation(),),)

    def test_cap(self):
        """Test the clause cap."""
        pairs = [And(args=(lit([x], [a]), lit([y], [b]))) for _ in range(4)]
        distinct = [And(args=(lit([x] * (k + 1), [a]), lit([y] * (k + 1), [b]))) for k in range(4)]
        assert to_cnf(Or(args=tuple(pairs)), cap=16) is not None
        with pytest.raises(CnfCapExceeded):
            to_cnf(Or(args=tuple(distinct)), cap=8)

    def test_rejects_inequations(self):
        """Test inequations must be eliminated first."""
        with pytest.raises(ValueError):
            to_cnf(lit([x], [a], False))


class TestCubic:
    """Test occurrence counting and the cubic reduction."""

    def test_occurrences(self):
        """Test per-choice maximum counts across clauses."""
        system = EquationSystem(clauses=((eq([x, x], [a]), eq([x], [y])), (eq([x], [y, y]),)))
        assert occurrences(system) == {x: 3, y: 3}
        assert not is_quadratic(system)
        assert is_cubic(system)

    def test_already_cubic(self):
        """Test cubic systems are unchanged."""
        system = EquationSystem.conjunction([eq([x, x], [a, x])])
        assert to_cubic(system) == system

    def test_quartic(self):
        """Test xxxx = a becomes x′x′xx = a ∧ x = x′."""
        system = EquationSystem.conjunction([eq([x, x, x, x], [a])])
        assert quartic_variable(system) == x
        fresh = var("x′")
        expected = EquationSystem.conjunction([eq([fresh, fresh, x, x], [a]), eq([x], [fresh])])
        assert to_cubic(system) == expected

    def test_sixfold(self):
        """Test x⁶ needs three rounds, each lowering the count by one."""
        system = EquationSystem.conjunction([eq([x] * 6, [a])])
        result = to_cubic(system)
        assert is_cubic(result)
        assert len(result.clauses) == 4
        assert len(result.variables()) == 4

    def test_disjunctive_clause(self):
        """Test every equation of a clause renames the same number of occurrences."""
        system = EquationSystem(clauses=((eq([x, x], [a]), eq([x], [b])), (eq([x, x], [y]),)))
        result = to_cubic(system)
        assert is_cubic(result)

    def test_equisatisfiable(self):
        """Test the reduction preserves satisfiability on a small instance."""
        system = EquationSystem.conjunction([eq([x, x, a, x], [x, a, x, x])])
        result = to_cubic(system)
        before = And(args=tuple(EqLit(equation=e) for e in system.equations))
        after = And(args=tuple(EqLit(equation=e) for e in result.equations))
        names = sorted(v.name for v in result.variables())
        assert satisfiable_up_to(before, ["x"], "a", 2)
        assert satisfiable_up_to(after, names, "a", 2)

    def test_random_systems(self):
        """Test seeded systems become cubic without changing bounded satisfiability."""
        rng = random.Random(0)
        for _ in range(200):
            budget = {x: 6, y: 4}
            equations = []
            for _ in range(rng.randint(1, 2)):
                sides = []
                for _ in range(2):
                    side = []
                    for _ in range(rng.randint(1, 4)):
                        s = rng.choice([a, b] + [v for v in (x, x, y) if budget[v]])
                        if s.is_var:
                            budget[s] -= 1
                        side.append(s)
                    sides.append(side)
                equations.append(eq(*sides))
            system = EquationSystem.conjunction(equations)
            result = to_cubic(system)
            assert is_cubic(result)
            before = And(args=tuple(EqLit(equation=e) for e in system.equations))
            after = And(args=tuple(EqLit(equation=e) for e in result.equations))
            names = sorted({"x", "y"} | {v.name for v in result.variables()})
            assert satisfiable_up_to(before, ["x", "y"], "ab", 1) == satisfiable_up_to(after, names, "ab", 1)
