"""
Tests for the reachability loop, model extraction and the solving pipeline.
"""
import random

import pytest

from wordeq_rmc.automata import Fa
from wordeq_rmc.config import Mode, SolverSettings
from wordeq_rmc.encoding import DestKind, decode_language, dest_set, eq_encode, problem_alphabet, sys_encode
from wordeq_rmc.engine import (RmcProblem, rmc_solve, saturate, saturate_mid, select_mode, solve_formula,
                               verify_model)
from wordeq_rmc.errors import ModeMismatchError
from wordeq_rmc.models import (And, BoolConst, EqLit, EquationSystem, LenAtom, LenLit, OracleOutcome, Or, Problem,
                               UnknownReason, Verdict, WordEquation)
from wordeq_rmc.oracle import brute_force
from wordeq_rmc.symbols import PAD_PAIR, const, pair_letters, var

a, b = const("a"), const("b")
w, x, y, z = var("w"), var("x"), var("y"), var("z")


def lit(lhs, rhs, positive=True) -> EqLit:
    return EqLit(equation=WordEquation(lhs=tuple(lhs), rhs=tuple(rhs)), positive=positive)


def length(coefficients, bound) -> LenLit:
    return LenLit(atom=LenAtom(coefficients=coefficients, bound=bound))


def length_eq(coefficients, constant):
    """``sum(coef * |v|) = constant`` as two atoms."""
    negated = {n: -c for n, c in coefficients.items()}
    return And(args=(length(coefficients, constant), length(negated, -constant)))


def eq(lhs, rhs) -> WordEquation:
    return WordEquation(lhs=tuple(lhs), rhs=tuple(rhs))


def random_quadratic_formula(rng):
    """A single equation, a two-equation system or a choice of two, with x and y at most twice each."""
    budget = {x: 2, y: 2}

    def side():
        term = []
        for _ in range(rng.randint(0, 3)):
            s = rng.choice([a, b] + [v for v in (x, y) if budget[v] > 0])
            if s.is_var:
                budget[s] -= 1
            term.append(s)
        return term

    shape = rng.choice(["single", "system", "choice"])
    first = lit(side(), side())
    if shape == "single":
        return first
    second = lit(side(), side())
    return And(args=(first, second)) if shape == "system" else Or(args=(first, second))


class TestSaturation:
    """Test closing languages under padding."""

    def test_trailing_pads(self):
        """Test trailing (⋄/⋄) letters may be dropped."""
        letters = pair_letters([a, x])
        closed = saturate(Fa.from_words([((x, a), PAD_PAIR, PAD_PAIR)], letters))
        assert closed.accepts(((x, a),))
        assert closed.accepts(((x, a), PAD_PAIR))
        assert not closed.accepts(((x, a), PAD_PAIR, PAD_PAIR, PAD_PAIR))

    def test_inner_pads(self):
        """Test the mid-word closure keeps the original word."""
        letters = pair_letters([a, x], delimited=True)
        word = ((x, a), PAD_PAIR, (a, a))
        closed = saturate_mid(Fa.from_words([word], letters))
        assert closed.accepts(word)
        assert closed.accepts(((x, a), (a, a)))


class TestSelectMode:
    """Test mode selection."""

    def test_automatic(self):
        """Test quadratic inputs use quadratic mode, others the cut."""
        assert select_mode(None, True, False) == Mode.QUADRATIC
        assert select_mode(None, False, False) == Mode.CUBIC
        assert select_mode(None, False, True) == Mode.COMPLETE

    def test_requested(self):
        """Test an explicit request is honoured."""
        assert select_mode(Mode.COMPLETE, True, False) == Mode.COMPLETE
        assert select_mode(Mode.CUBIC, True, False) == Mode.CUBIC

    def test_quadratic_mismatch(self):
        """Test quadratic mode refuses non-quadratic systems."""
        with pytest.raises(ModeMismatchError):
            select_mode(Mode.QUADRATIC, False, False)

    def test_length_falls_back_to_complete(self):
        """Test the cut is not combined with length tracks."""
        assert select_mode(Mode.CUBIC, False, True) == Mode.COMPLETE


class TestVerifyModel:
    """Test checking assignments against formulas."""

    def test_equation(self):
        """Test substitution of both sides."""
        formula = lit([x, a, y], [y, x])
        assert not verify_model(formula, {"x": "a", "y": "a"})
        assert verify_model(lit([x, y], [a, x]), {"x": "aa", "y": "a"})

    def test_missing_variables_are_empty(self):
        """Test unassigned variables count as ε."""
        assert verify_model(lit([x, a], [a]), {})

    def test_connectives(self):
        """Test inequations, lengths and Boolean structure."""
        formula = And(args=(lit([x], [y], False), Or(args=(length({"x": 1}, 0), BoolConst(value=False)))))
        assert verify_model(formula, {"x": "", "y": "b"})
        assert not verify_model(formula, {"x": "a", "y": "b"})


class TestSolveQuadratic:
    """Test single quadratic equations end to end."""

    def test_unsat_running_example(self):
        """Test xay = yx has no solution and reaches its fixpoint after three steps."""
        result = solve_formula(lit([x, a, y], [y, x]))
        assert result.verdict == Verdict.UNSAT
        assert result.mode == Mode.QUADRATIC
        assert result.iterations == 3
        assert result.model is None

    def test_sat(self):
        """Test xy = ax is solved with a verified model."""
        formula = lit([x, y], [a, x])
        result = solve_formula(formula)
        assert result.verdict == Verdict.SAT
        assert set(result.model) == {"x", "y"}
        assert verify_model(formula, result.model)

    def test_already_solved(self):
        """Test a = a is sat without any step."""
        result = solve_formula(lit([a], [a]))
        assert result.verdict == Verdict.SAT
        assert result.iterations == 0
        assert result.model == {}

    def test_declared_variables_in_model(self):
        """Test declared but unused variables appear in the model."""
        result = solve_formula(lit([x], [a]), variables=["u"])
        assert result.verdict == Verdict.SAT
        assert result.model == {"u": "", "x": "a"}

    def test_budget(self):
        """Test the iteration budget stops the loop with unknown."""
        result = solve_formula(lit([x, a, y], [y, x]), SolverSettings(max_iterations=2))
        assert result.verdict == Verdict.UNKNOWN
        assert result.reason == UnknownReason.BUDGET
        assert result.iterations == 2

    def test_complete_mode(self):
        """Test the doubling bound solves quadratic inputs too."""
        formula = lit([x, y], [a, x])
        result = solve_formula(formula, SolverSettings(mode=Mode.COMPLETE))
        assert result.verdict == Verdict.SAT
        assert result.mode == Mode.COMPLETE
        assert verify_model(formula, result.model)


class TestSolveSystems:
    """Test conjunctions, disjunctions and inequations."""

    def test_unsat_system(self):
        """Test xz = ab ∧ wabyx = awbzy has no solution."""
        formula = And(args=(lit([x, z], [a, b]), lit([w, a, b, y, x], [a, w, b, z, y])))
        result = solve_formula(formula)
        assert result.verdict == Verdict.UNSAT

    def test_sat_system(self):
        """Test x = a ∧ y = bx."""
        formula = And(args=(lit([x], [a]), lit([y], [b, x])))
        result = solve_formula(formula)
        assert result.verdict == Verdict.SAT
        assert result.model == {"x": "a", "y": "ba"}

    def test_conflicting_system(self):
        """Test x = a ∧ x = b."""
        result = solve_formula(And(args=(lit([x], [a]), lit([x], [b]))))
        assert result.verdict == Verdict.UNSAT

    def test_inequation(self):
        """Test x ≠ a over {a} is satisfied by a model the engine finds."""
        formula = lit([x], [a], False)
        result = solve_formula(formula, alphabet=["a"])
        assert result.verdict == Verdict.SAT
        assert result.model["x"] != "a"

    def test_trivially_false(self):
        """Test a formula that is false before encoding."""
        result = solve_formula(And(args=(lit([x], [a]), BoolConst(value=False))))
        assert result.verdict == Verdict.UNSAT
        assert result.iterations == 0

    def test_cnf_cap(self):
        """Test an oversized CNF gives unknown."""
        formula = Or(args=(And(args=(lit([x], [a]), lit([y], [b]))), And(args=(lit([x], [b]), lit([y], [a])))))
        result = solve_formula(formula, SolverSettings(cnf_cap=2))
        assert result.verdict == Verdict.UNKNOWN
        assert result.reason == UnknownReason.CNF_CAP


class TestSolveCubic:
    """Test inputs with more than two occurrences of a variable."""

    def test_cubic_sat(self):
        """Test xx = ax is solved with x = a."""
        formula = lit([x, x], [a, x])
        result = solve_formula(formula)
        assert result.mode == Mode.CUBIC
        assert result.verdict == Verdict.SAT
        assert verify_model(formula, result.model)

    def test_quadratic_request_rejected(self):
        """Test requesting quadratic mode for xx = ax."""
        with pytest.raises(ModeMismatchError):
            solve_formula(lit([x, x], [a, x]), SolverSettings(mode=Mode.QUADRATIC))


class TestSolveLength:
    """Test word equations with length constraints."""

    def test_sat(self):
        """Test xy = ax ∧ |x| = |y| + 1."""
        formula = And(args=(lit([x, y], [a, x]), length_eq({"x": 1, "y": -1}, 1)))
        result = solve_formula(formula)
        assert result.verdict == Verdict.SAT
        assert verify_model(formula, result.model)
        assert len(result.model["x"]) == len(result.model["y"]) + 1

    def test_unsat(self):
        """Test x = ay ∧ |x| = |y| runs out of configurations after three steps."""
        formula = And(args=(lit([x], [a, y]), length_eq({"x": 1, "y": -1}, 0)))
        result = solve_formula(formula)
        assert result.verdict == Verdict.UNSAT
        assert result.iterations == 3

    def test_sat_shifted(self):
        """Test x = ay ∧ |x| = |y| + 1."""
        formula = And(args=(lit([x], [a, y]), length_eq({"x": 1, "y": -1}, 1)))
        result = solve_formula(formula)
        assert result.verdict == Verdict.SAT
        assert verify_model(formula, result.model)
        assert result.model["x"] == "a" + result.model["y"]

    def test_unsat_fixed_length(self):
        """Test x = a ∧ |x| = 2."""
        formula = And(args=(lit([x], [a]), length_eq({"x": 1}, 2)))
        result = solve_formula(formula)
        assert result.verdict == Verdict.UNSAT

    def test_no_constants(self):
        """Test without constants every variable is empty, so a positive length is unsat."""
        formula = And(args=(lit([x], [y]), length_eq({"x": 1}, 1)))
        assert solve_formula(formula).verdict == Verdict.UNSAT

        result = solve_formula(formula, alphabet=["b"])
        assert result.verdict == Verdict.SAT
        assert result.model == {"x": "b", "y": "b"}


class TestTrace:
    """Test per-iteration dumps."""

    def test_trace_files(self, tmp_path):
        """Test one dot file per reach set and a step log line per iteration."""
        result = solve_formula(lit([x, a, y], [y, x]), SolverSettings(trace_dir=tmp_path))
        assert result.iterations == 3
        for i in range(1, 4):
            assert (tmp_path / f"reach_{i}.dot").read_text(encoding="utf-8").startswith("digraph")
            assert (tmp_path / f"processed_{i}.dot").exists()
        lines = (tmp_path / "steps.log").read_text(encoding="utf-8").splitlines()
        assert lines[0].startswith("iteration\tmode")
        assert len(lines) == 4
        assert lines[1].split("\t")[1] == "quadratic"


class TestReachHistory:
    """Test the reach sets recorded by the loop."""

    def test_running_example(self):
        """Test xay = yx gains ax = x in the second step and is closed after the third."""
        alphabet = problem_alphabet([a, x, y])
        problem = RmcProblem(initial=eq_encode(eq([x, a, y], [y, x]), alphabet),
                             destination=dest_set(DestKind.SINGLE, alphabet))
        result, history = rmc_solve(problem)
        assert result.verdict == Verdict.UNSAT
        assert len(history.reaches) == 4

        def configs(reach):
            return decode_language(reach, 6)

        first = {EquationSystem.conjunction([e]) for e in
                 (eq([x, a, y], [y, x]), eq([a, y], [y]), eq([a, x, y], [y, x]), eq([a], []))}
        assert configs(history.reaches[0]) == {EquationSystem.conjunction([eq([x, a, y], [y, x])])}
        assert configs(history.reaches[1]) == first
        assert configs(history.reaches[2]) == first | {EquationSystem.conjunction([eq([a, x], [x])])}
        assert configs(history.reaches[3]) == configs(history.reaches[2])

    def test_system_leaves(self):
        """Test every solution of xz = ab leads to its instance of wabyx = awbzy."""
        system = EquationSystem.conjunction([eq([x, z], [a, b]), eq([w, a, b, y, x], [a, w, b, z, y])])
        alphabet = problem_alphabet([a, b, w, x, y, z], delimited=True)
        problem = RmcProblem(initial=sys_encode(system, alphabet), destination=dest_set(DestKind.SYSTEM, alphabet),
                             system=True)
        result, history = rmc_solve(problem)
        assert result.verdict == Verdict.UNSAT
        leaves = [
            eq([w, a, b, y, a, b], [a, w, b, y]),
            eq([w, a, b, y, a], [a, w, b, b, y]),
            eq([w, a, b, y], [a, w, b, a, b, y]),
        ]
        for leaf in leaves:
            config = sys_encode(EquationSystem.conjunction([eq([], []), leaf]), alphabet)
            assert any(not reach.intersect(config.with_alphabet(reach.alphabet)).is_empty()
                       for reach in history.reaches), str(leaf)


class TestOracleAgreement:
    """Test verdicts against bounded brute force on small quadratic inputs."""

    @pytest.mark.parametrize("formula", [
        lit([x, y], [y, x]),
        lit([x, a], [a, y]),
        lit([x, a, b], [b, a, x]),
        lit([a, x, b], [b, y, a]),
        lit([x, a, y], [y, x]),
        lit([x, b, y], [y, a, x]),
        And(args=(lit([x, a], [a, y]), lit([y], [b]))),
        And(args=(lit([x, y], [b, a]), lit([y, x], [a, b]))),
        Or(args=(lit([x, a], [b, x]), lit([x], [b, y]))),
    ])
    def test_agrees_with_oracle(self, formula):
        """Test oracle models imply sat and unsat implies no oracle model."""
        result = solve_formula(formula, alphabet=["a", "b"])
        oracle = brute_force(Problem(alphabet=("a", "b"), formula=formula), 4)
        assert result.verdict != Verdict.UNKNOWN
        if oracle.outcome == OracleOutcome.SAT:
            assert result.verdict == Verdict.SAT
        if result.verdict == Verdict.UNSAT:
            assert oracle.outcome == OracleOutcome.NO_MODEL

    @pytest.mark.parametrize("seed", range(60))
    def test_random_agreement(self, seed):
        """Test seeded random equations, systems and choices over {a, b}."""
        formula = random_quadratic_formula(random.Random(seed))
        result = solve_formula(formula, alphabet=["a", "b"])
        oracle = brute_force(Problem(alphabet=("a", "b"), formula=formula), 4)
        assert result.verdict != Verdict.UNKNOWN
        if oracle.outcome == OracleOutcome.SAT:
            assert result.verdict == Verdict.SAT
        if result.verdict == Verdict.SAT:
            assert verify_model(formula, result.model)
        else:
            assert oracle.outcome == OracleOutcome.NO_MODEL
