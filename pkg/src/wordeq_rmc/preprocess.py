"""
Front-end rewrites applied before encoding.

Negation normal form, splitting word and length conjuncts, eliminating word inequations,
CNF conversion by distribution and the reduction of a system to a cubic one.
"""
import logging
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

try:
    from .errors import CnfCapExceeded, UnsupportedFeatureError
    from .models import (FALSE, TRUE, And, BoolConst, EqLit, EquationSystem, LenLit, Not, Or, WordEquation, conj,
                         disj)
    from .symbols import Sym, SymKind, sym_key
except ImportError:
    from errors import CnfCapExceeded, UnsupportedFeatureError
    from models import (FALSE, TRUE, And, BoolConst, EqLit, EquationSystem, LenLit, Not, Or, WordEquation, conj,
                        disj)
    from symbols import Sym, SymKind, sym_key

logger = logging.getLogger(__name__)

Clause = Tuple[WordEquation, ...]


def to_nnf(formula, negate: bool = False):
    """Push negations down to literals; length atoms absorb them."""
    if isinstance(formula, Not):
        return to_nnf(formula.arg, not negate)
    if isinstance(formula, BoolConst):
        return BoolConst(value=formula.value != negate)
    if isinstance(formula, EqLit):
        if not negate:
            return formula
        return EqLit(equation=formula.equation, positive=not formula.positive)
    if isinstance(formula, LenLit):
        return LenLit(atom=formula.atom.negated()) if negate else formula
    if isinstance(formula, (And, Or)):
        args = tuple(to_nnf(a, negate) for a in formula.args)
        flip = isinstance(formula, And) == negate
        return Or(args=args) if flip else And(args=args)
    raise TypeError(f"unknown formula node {type(formula).__name__}")


def _literal_kinds(formula) -> Set[str]:
    if isinstance(formula, EqLit):
        return {"word"}
    if isinstance(formula, LenLit):
        return {"length"}
    if isinstance(formula, BoolConst):
        return set()
    if isinstance(formula, Not):
        return _literal_kinds(formula.arg)
    kinds = set()
    for arg in formula.args:
        kinds |= _literal_kinds(arg)
    return kinds


def _conjuncts(formula) -> List:
    if isinstance(formula, And):
        found = []
        for arg in formula.args:
            found.extend(_conjuncts(arg))
        return found
    return [formula]


def split_constraints(formula) -> Tuple[object, object]:
    """Separate the top-level conjunction into a word part and a length part."""
    words, lengths = [], []
    for part in _conjuncts(formula):
        kinds = _literal_kinds(part)
        if kinds == {"word", "length"}:
            logger.error(f"Conjunct mixes word and length constraints: {part}")
            raise UnsupportedFeatureError("mixed", "word and length literals under one disjunction or negation")
        if kinds == {"length"}:
            lengths.append(part)
        else:
            words.append(part)
    word_part = conj(words) if words else TRUE
    length_part = conj(lengths) if lengths else TRUE
    return word_part, length_part


class FreshNames:
    """Deterministic fresh variable names: ``x′``, ``x″``, ``x‴``, then more primes."""

    def __init__(self, taken: Iterable[str] = ()):
        self.taken = set(taken)

    def fresh(self, base: str) -> Sym:
        base = base.rstrip("′″‴")
        k = 1
        while True:
            name = base + self._primes(k)
            if name not in self.taken:
                self.taken.add(name)
                return Sym(SymKind.VAR, name)
            k += 1

    @staticmethod
    def _primes(k: int) -> str:
        return {1: "′", 2: "″", 3: "‴"}.get(k, "′" * k)


def _inequation_cases(eq: WordEquation, alphabet: Sequence[Sym], names: FreshNames):
    """``α ≠ β`` as: one side is a strict prefix of the other, or they differ at some position."""
    alpha, beta = eq.lhs, eq.rhs
    suffix = names.fresh("x")
    first, second = names.fresh("x"), names.fresh("x")
    prefix = names.fresh("y")
    cases = []
    for c in alphabet:
        cases.append(EqLit(equation=WordEquation(lhs=alpha, rhs=beta + (c, suffix))))
        cases.append(EqLit(equation=WordEquation(lhs=alpha + (c, suffix), rhs=beta)))
    for c1, c2 in product(alphabet, repeat=2):
        if c1 != c2:
            cases.append(And(args=(
                EqLit(equation=WordEquation(lhs=alpha, rhs=(prefix, c1, first))),
                EqLit(equation=WordEquation(lhs=beta, rhs=(prefix, c2, second))),
            )))
    return disj(cases) if cases else FALSE


def eliminate_inequalities(formula, alphabet: Sequence[Sym], names: FreshNames):
    """Replace every negative word literal by equations over fresh variables.

    Each inequation gets its own fresh variables, shared by its disjuncts.
    """
    formula = to_nnf(formula)
    alphabet = sorted(alphabet, key=sym_key)

    def rewrite(node):
        if isinstance(node, EqLit) and not node.positive:
            logger.debug(f"Eliminating inequation {node.equation}")
            return _inequation_cases(node.equation, alphabet, names)
        if isinstance(node, And):
            return And(args=tuple(rewrite(a) for a in node.args))
        if isinstance(node, Or):
            return Or(args=tuple(rewrite(a) for a in node.args))
        return node

    return rewrite(formula)


def _dedup(items: Iterable) -> tuple:
    seen, out = set(), []
    for item in items:
        if item not in seen:
            seen.add(item)
            out.append(item)
    return tuple(out)


def _clauses(formula, cap: int) -> List[Clause]:
    if isinstance(formula, EqLit):
        if not formula.positive:
            raise ValueError("inequations must be eliminated before CNF conversion")
        if formula.equation.trimmed().is_empty():
            return []
        return [(formula.equation,)]
    if isinstance(formula, BoolConst):
        return [] if formula.value else [()]
    if isinstance(formula, And):
        found: List[Clause] = []
        for arg in formula.args:
            found.extend(_clauses(arg, cap))
            if len(found) > cap:
                raise CnfCapExceeded(cap)
        return list(_dedup(found))
    if isinstance(formula, Or):
        acc: List[Clause] = [()]
        for arg in formula.args:
            acc = [_dedup(left + right) for left in acc for right in _clauses(arg, cap)]
            acc = list(_dedup(acc))
            if len(acc) > cap:
                raise CnfCapExceeded(cap)
        return acc
    raise TypeError(f"unexpected node {type(formula).__name__} in a word formula")


def to_cnf(formula, cap: int = 4096) -> Optional[EquationSystem]:
    """Distribute into clauses of equations.

    Returns None when some clause is empty (the formula is unsatisfiable). A formula that is
    trivially true becomes the single equation ``ε = ε``.
    """
    try:
        clauses = _clauses(to_nnf(formula), cap)
    except CnfCapExceeded:
        logger.warning(f"CNF conversion exceeded the cap of {cap} clauses")
        raise
    if any(not c for c in clauses):
        return None
    if not clauses:
        return EquationSystem.conjunction([WordEquation()])
    logger.debug(f"CNF has {len(clauses)} clauses")
    return EquationSystem(clauses=tuple(clauses))


def occurrences(system: EquationSystem) -> Dict[Sym, int]:
    """Occurrences per variable for the worst choice of one equation per clause."""
    totals: Dict[Sym, int] = {}
    for clause in system.clauses:
        worst: Dict[Sym, int] = {}
        for eq in clause:
            for x in eq.variables():
                worst[x] = max(worst.get(x, 0), eq.occurrences(x))
        for x, n in worst.items():
            totals[x] = totals.get(x, 0) + n
    return totals


def is_quadratic(system: EquationSystem) -> bool:
    return all(n <= 2 for n in occurrences(system).values())


def is_cubic(system: EquationSystem) -> bool:
    return all(n <= 3 for n in occurrences(system).values())


def quartic_variable(system: EquationSystem) -> Optional[Sym]:
    """The first variable (in symbol order) occurring more than three times."""
    over = [x for x, n in occurrences(system).items() if n > 3]
    return min(over, key=sym_key) if over else None


def _rename_first(eq: WordEquation, x: Sym, fresh: Sym, count: int) -> WordEquation:
    renamed = 0
    sides = []
    for side in (eq.lhs, eq.rhs):
        out = []
        for s in side:
            if s == x and renamed < count:
                out.append(fresh)
                renamed += 1
            else:
                out.append(s)
        sides.append(tuple(out))
    return WordEquation(lhs=sides[0], rhs=sides[1])


def to_cubic(system: EquationSystem, names: Optional[FreshNames] = None) -> EquationSystem:
    """Split variables occurring more than three times, appending ``x = x′`` each round.

    The first two occurrences in reading order are renamed. In a disjunctive clause every
    equation renames up to the same number of occurrences, so each choice of equations
    loses exactly two occurrences of x.
    """
    if names is None:
        names = FreshNames(s.name for s in system.variables())
    clauses = list(system.clauses)
    rounds = 0
    while True:
        current = EquationSystem(clauses=tuple(clauses))
        x = quartic_variable(current)
        if x is None:
            break
        fresh = names.fresh(x.name)
        remaining = 2
        for k, clause in enumerate(clauses):
            if remaining == 0:
                break
            most = max(eq.occurrences(x) for eq in clause)
            take = min(remaining, most)
            if take:
                clauses[k] = tuple(_rename_first(eq, x, fresh, take) for eq in clause)
                remaining -= take
        clauses.append((WordEquation(lhs=(x,), rhs=(fresh,)),))
        rounds += 1
    if rounds:
        logger.info(f"Cubic reduction added {rounds} fresh variables")
    return EquationSystem(clauses=tuple(clauses))
