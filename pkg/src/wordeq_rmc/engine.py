"""
The regular model checking loop and backward model extraction.

Starting from the encoded constraint, the engine repeatedly applies one proof step to the
whole configuration language, saturates over padding and stops when a solved configuration
is reachable (sat), when nothing new appears (unsat) or when a budget runs out (unknown).
"""
import logging
import time
from functools import lru_cache
from pathlib import Path
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field

try:
    from .automata import Fa
    from .config import Mode, SolverSettings
    from .encoding import DestKind, cnf_encode, dest_set, pad_closure, problem_alphabet, split_length
    from .errors import CnfCapExceeded, ExtractionError, ModeMismatchError
    from .length import build_len_step, combine_eq_len, decode_bits, formula_to_fa
    from .models import (And, BoolConst, EqLit, LenAtom, LenLit, Not, Or, Problem, SolveResult, UnknownReason,
                         Verdict, conj, iter_literals)
    from .nielsen import (NielsenStep, RuleKind, RuleTag, build_cut, build_step_single, build_step_system,
                          build_trim, concrete_tags, trim_normal_filter)
    from .preprocess import FreshNames, eliminate_inequalities, is_quadratic, split_constraints, to_cnf, to_cubic
    from .symbols import (LENSEP, PAD_PAIR, Letter, Sym, SymKind, is_pair, letter_symbols, sorted_syms)
    from .transducer import Transducer, TransducerBuilder
except ImportError:
    from automata import Fa
    from config import Mode, SolverSettings
    from encoding import DestKind, cnf_encode, dest_set, pad_closure, problem_alphabet, split_length
    from errors import CnfCapExceeded, ExtractionError, ModeMismatchError
    from length import build_len_step, combine_eq_len, decode_bits, formula_to_fa
    from models import (And, BoolConst, EqLit, LenAtom, LenLit, Not, Or, Problem, SolveResult, UnknownReason,
                        Verdict, conj, iter_literals)
    from nielsen import (NielsenStep, RuleKind, RuleTag, build_cut, build_step_single, build_step_system,
                         build_trim, concrete_tags, trim_normal_filter)
    from preprocess import FreshNames, eliminate_inequalities, is_quadratic, split_constraints, to_cnf, to_cubic
    from symbols import (LENSEP, PAD_PAIR, Letter, Sym, SymKind, is_pair, letter_symbols, sorted_syms)
    from transducer import Transducer, TransducerBuilder

logger = logging.getLogger(__name__)


# -- saturation ---------------------------------------------------------------------------

def saturate(lang: Fa) -> Fa:
    """Close ``lang`` under removing trailing ``(⋄/⋄)`` letters."""
    fa = lang.remove_epsilon().trim()
    final = set(fa.final)
    changed = True
    while changed:
        changed = False
        for s, row in enumerate(fa.delta):
            if s not in final and row.get(PAD_PAIR, frozenset()) & final:
                final.add(s)
                changed = True
    return Fa(fa.alphabet, fa.delta, fa.initial, final)


@lru_cache(maxsize=64)
def build_pad_deletion(alphabet: FrozenSet[Letter]) -> Transducer:
    """Copies every letter, optionally deleting ``(⋄/⋄)`` ones."""
    builder = TransducerBuilder(alphabet)
    state = builder.state()
    builder.initial.add(state)
    builder.final.add(state)
    for letter in alphabet:
        builder.add(state, letter, letter, state)
    builder.add(state, PAD_PAIR, None, state)
    return builder.build()


def saturate_mid(lang: Fa) -> Fa:
    """Close ``lang`` under removing ``(⋄/⋄)`` letters anywhere, keeping the original words."""
    return build_pad_deletion(lang.alphabet).image(lang, lang.alphabet)


# -- step families --------------------------------------------------------------------------

def _word_symbols(alphabet: FrozenSet[Letter]) -> Tuple[List[Sym], List[Sym]]:
    syms = letter_symbols(alphabet)
    return (sorted_syms(s for s in syms if s.is_var), sorted_syms(s for s in syms if s.is_const))


class NielsenFamily:
    """The two rule families (``x -> ε`` and ``x -> a x``) of one iteration."""

    def __init__(self, steps: Tuple[NielsenStep, NielsenStep], label: str):
        self.eps, self.prepend = steps
        self.label = label

    def tags(self, alphabet: FrozenSet[Letter]) -> List[RuleTag]:
        return concrete_tags(*_word_symbols(alphabet))

    def size(self, alphabet: FrozenSet[Letter]) -> int:
        return len(self.tags(alphabet))

    def _member(self, tag: RuleTag) -> NielsenStep:
        step = self.eps if tag.kind == RuleKind.VAR_EPS else self.prepend
        return step.pinned(tag)

    def image(self, reach: Fa) -> Fa:
        return self.eps.image(reach).union(self.prepend.image(reach))

    def preimage(self, tag: RuleTag, target: Fa, restrict: Fa) -> Fa:
        return self._member(tag).preimage(target, restrict)

    def undo(self, target: Fa, restrict: Fa) -> Tuple[Tuple[Letter, ...], List[RuleTag]]:
        """A predecessor in ``restrict`` of some word of ``target``, with the rule used."""
        for tag in self.tags(restrict.alphabet):
            pre = self.preimage(tag, target, restrict)
            if not pre.is_empty():
                logger.debug(f"Undoing {tag}")
                return pre.pick_word(), [tag]
        raise ExtractionError(f"no {self.label} rule leads back into the previous reach set")


class LengthFamily(NielsenFamily):
    """Nielsen rules with the matching length update on the bit tracks."""

    def __init__(self, steps: Tuple[NielsenStep, NielsenStep], label: str, order: Sequence[str]):
        super().__init__(steps, label)
        self.order = tuple(order)
        self._combined: Dict[Tuple[RuleTag, FrozenSet[Letter]], Transducer] = {}

    def _tail(self, tag: RuleTag, alphabet: FrozenSet[Letter]) -> Transducer:
        pairs = frozenset(a for a in alphabet if is_pair(a))
        key = (tag, pairs)
        if key not in self._combined:
            trim = build_trim(pairs).retag(tag)
            self._combined[key] = combine_eq_len(trim, build_len_step(tag, self.order))
        return self._combined[key]

    def image(self, reach: Fa) -> Fa:
        alphabet = reach.alphabet
        result = Fa.empty(alphabet)
        for tag in self.tags(alphabet):
            substituted = self._member(tag).substitute(reach, passthrough=LENSEP)
            if substituted.is_empty():
                continue
            stepped = self._tail(tag, alphabet).image(substituted, alphabet)
            result = result.union(stepped)
        return result.intersect(trim_normal_filter(alphabet))

    def preimage(self, tag: RuleTag, target: Fa, restrict: Fa) -> Fa:
        alphabet = restrict.alphabet
        untrimmed = self._tail(tag, alphabet).preimage(target.with_alphabet(alphabet), alphabet)
        return self._member(tag).frt.preimage(untrimmed, restrict, passthrough=LENSEP)


class CutFamily:
    """Bound-3 Nielsen step followed by the quartic-to-cubic cut with a fresh variable."""

    def __init__(self, inner: NielsenFamily, fresh: Sym):
        self.inner = inner
        self.fresh = fresh
        self.label = f"{inner.label}+cut"
        self.mid: Optional[Fa] = None
        self.cut = None

    def size(self, alphabet: FrozenSet[Letter]) -> int:
        return self.inner.size(alphabet) + 1

    def image(self, reach: Fa) -> Fa:
        self.mid = self.inner.image(reach).normalize()
        variables, _ = _word_symbols(self.mid.alphabet)
        self.cut = build_cut(self.fresh, variables, self.mid.alphabet)
        return self.cut.image(self.mid)

    def undo(self, target: Fa, restrict: Fa) -> Tuple[Tuple[Letter, ...], List[RuleTag]]:
        if self.cut is None:
            self.image(restrict)
        uncut = self.cut.preimage(target, self.mid)
        if uncut.is_empty():
            raise ExtractionError(f"cut by {self.fresh} cannot be undone")
        word = uncut.pick_word()
        previous, tags = self.inner.undo(pad_closure(word, self.mid.alphabet), restrict)
        return previous, [self.cut.tag] + tags


# -- problem and history ----------------------------------------------------------------------

class RmcProblem(BaseModel):
    """Everything the reachability loop needs."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    initial: Fa
    destination: Fa
    mode: Mode = Mode.QUADRATIC
    system: bool = False
    length_order: Optional[Tuple[str, ...]] = None
    max_iterations: int = Field(1000, ge=1)
    timeout_s: float = Field(20.0, gt=0)
    trace_dir: Optional[Path] = None

    @property
    def with_length(self) -> bool:
        return self.length_order is not None


class ReachHistory(BaseModel):
    """``reach_0 .. reach_k`` and the family used for each step."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    reaches: List[Fa] = Field(default_factory=list)
    families: List[object] = Field(default_factory=list)
    processed: Optional[Fa] = None

    def append(self, reach: Fa, family) -> None:
        self.reaches.append(reach)
        self.families.append(family)


class TraceWriter:
    """Writes ``reach_<i>.dot``, ``processed_<i>.dot`` and one ``steps.log`` line per iteration."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.log_path = self.directory / "steps.log"
        self.log_path.write_text("iteration\tmode\trules\treach_states\tprocessed_states\telapsed_ms\n",
                                 encoding="utf-8")

    def write(self, iteration: int, mode: Mode, rules: int, reach: Fa, processed: Fa, elapsed_ms: float) -> None:
        (self.directory / f"reach_{iteration}.dot").write_text(reach.to_dot(f"reach_{iteration}"), encoding="utf-8")
        (self.directory / f"processed_{iteration}.dot").write_text(
            processed.to_dot(f"processed_{iteration}"), encoding="utf-8")
        with open(self.log_path, "a", encoding="utf-8") as f:
            f.write(f"{iteration}\t{mode.value}\t{rules}\t{reach.num_states}\t{processed.num_states}\t"
                    f"{elapsed_ms:.1f}\n")


# -- the loop -------------------------------------------------------------------------------

def _fresh_cut_name(i: int, alphabet: FrozenSet[Letter]) -> Sym:
    taken = {s.name for s in letter_symbols(alphabet)}
    name = f"v{i}"
    while name in taken:
        name += "′"
    return Sym(SymKind.VAR, name)


class RmcEngine:
    """Runs the reachability loop for one problem."""

    def __init__(self, problem: RmcProblem):
        self.problem = problem
        self.history = ReachHistory()
        self.trace = TraceWriter(problem.trace_dir) if problem.trace_dir else None

    def family(self, i: int, alphabet: FrozenSet[Letter]):
        """The step family applied to ``reach_i``."""
        p = self.problem
        build = build_step_system if p.system else build_step_single
        if p.mode == Mode.QUADRATIC:
            steps, label = build(2), "bound-2"
        elif p.mode == Mode.CUBIC:
            return CutFamily(NielsenFamily(build_step_system(3), "bound-3"), _fresh_cut_name(i, alphabet))
        else:
            bound = 2 ** (i + 2)
            steps, label = build(bound), f"bound-{bound}"
        if p.with_length:
            return LengthFamily(steps, label, p.length_order)
        return NielsenFamily(steps, label)

    def _saturate(self, lang: Fa) -> Fa:
        if self.problem.system or self.problem.with_length:
            return saturate_mid(lang)
        return saturate(lang)

    def run(self) -> SolveResult:
        p = self.problem
        start = time.monotonic()
        reach = p.initial.normalize()
        processed = Fa.empty(reach.alphabet).normalize()
        self.history.reaches.append(reach)
        peak = reach.num_states
        i = 0
        while True:
            elapsed_ms = (time.monotonic() - start) * 1000
            hit = reach.intersect(p.destination.with_alphabet(reach.alphabet))
            if not hit.is_empty():
                self.history.processed = processed
                model = extract_model(self.history, hit, p)
                logger.info(f"Reached a solved configuration after {i} iterations")
                return SolveResult(verdict=Verdict.SAT, model=model, mode=p.mode, iterations=i,
                                   peak_states=peak, time_ms=elapsed_ms)
            processed = processed.with_alphabet(reach.alphabet)
            if reach.included(processed):
                self.history.processed = processed
                logger.info(f"Fixpoint after {i} iterations")
                return SolveResult(verdict=Verdict.UNSAT, mode=p.mode, iterations=i, peak_states=peak,
                                   time_ms=elapsed_ms)
            processed = processed.union(reach).normalize()
            peak = max(peak, processed.num_states)
            if i >= p.max_iterations or elapsed_ms / 1000 > p.timeout_s:
                self.history.processed = processed
                logger.warning(f"Budget exhausted after {i} iterations ({elapsed_ms:.0f} ms)")
                return SolveResult(verdict=Verdict.UNKNOWN, reason=UnknownReason.BUDGET, mode=p.mode,
                                   iterations=i, peak_states=peak, time_ms=elapsed_ms)
            family = self.family(i, reach.alphabet)
            reach = self._saturate(family.image(reach)).normalize()
            self.history.append(reach, family)
            peak = max(peak, reach.num_states)
            if reach.alphabet != processed.alphabet:
                logger.debug(f"Alphabet grew to {len(reach.alphabet)} letters")
            rules = family.size(reach.alphabet)
            logger.debug(f"Iteration {i + 1}: {family.label} ({rules} rules), reach {reach.num_states} states, "
                         f"processed {processed.num_states} states")
            if self.trace:
                self.trace.write(i + 1, p.mode, rules, reach, processed, (time.monotonic() - start) * 1000)
            i += 1


def rmc_solve(problem: RmcProblem) -> Tuple[SolveResult, ReachHistory]:
    engine = RmcEngine(problem)
    result = engine.run()
    return result, engine.history


# -- model extraction -------------------------------------------------------------------------

def _initial_assignment(word: Sequence[Letter], problem: RmcProblem) -> Dict[Sym, str]:
    if not problem.with_length:
        return {}
    _, bits = split_length(word)
    lengths = decode_bits(bits or (), problem.length_order)
    constants = sorted(s.name for s in letter_symbols(problem.initial.alphabet) if s.is_const)
    # without constants every length is pinned to zero, so the filler is never repeated
    filler = constants[0] if constants else ""
    return {Sym(SymKind.VAR, name): filler * n for name, n in lengths.items()}


def _value(sym: Sym, assignment: Mapping[Sym, str]) -> str:
    return sym.name if sym.is_const else assignment.get(sym, "")


def extract_model(history: ReachHistory, hit: Fa, problem: RmcProblem) -> Dict[str, str]:
    """Walk back from a solved configuration, rebuilding the assignment rule by rule."""
    word = hit.pick_word()
    assignment = _initial_assignment(word, problem)
    for level in range(len(history.reaches) - 1, 0, -1):
        previous = history.reaches[level - 1]
        family = history.families[level - 1]
        current_alphabet = history.reaches[level].alphabet
        try:
            word, tags = family.undo(pad_closure(word, current_alphabet), previous)
        except ExtractionError:
            logger.error(f"Model extraction failed at iteration {level}")
            raise
        for tag in tags:
            if tag.kind == RuleKind.VAR_EPS:
                assignment[tag.var] = ""
            elif tag.kind == RuleKind.VAR_PREPEND:
                assignment[tag.var] = _value(tag.alpha, assignment) + _value(tag.var, assignment)
            else:
                assignment.pop(tag.var, None)
    variables = (s for s in letter_symbols(problem.initial.alphabet) if s.is_var)
    model = {x.name: assignment.get(x, "") for x in variables}
    for x, value in assignment.items():
        model.setdefault(x.name, value)
    return model


# -- verification and the end-to-end pipeline ------------------------------------------------------

def _substitute(term: Sequence[Sym], model: Mapping[str, str]) -> str:
    return "".join(s.name if s.is_const else model.get(s.name, "") for s in term)


def verify_model(formula, model: Mapping[str, str]) -> bool:
    """Whether ``model`` satisfies ``formula``; missing variables are empty."""
    if isinstance(formula, EqLit):
        eq = formula.equation
        same = _substitute(eq.lhs, model) == _substitute(eq.rhs, model)
        return same == formula.positive
    if isinstance(formula, LenLit):
        return formula.atom.evaluate({name: len(model.get(name, "")) for name in formula.atom.variables()})
    if isinstance(formula, BoolConst):
        return formula.value
    if isinstance(formula, Not):
        return not verify_model(formula.arg, model)
    if isinstance(formula, And):
        return all(verify_model(a, model) for a in formula.args)
    if isinstance(formula, Or):
        return any(verify_model(a, model) for a in formula.args)
    raise TypeError(f"unknown formula node {type(formula).__name__}")


def _formula_constants(formula) -> List[str]:
    found = set()
    for lit in iter_literals(formula):
        if isinstance(lit, EqLit):
            found.update(s.name for s in lit.equation.constants())
    return sorted(found)


def select_mode(requested: Optional[Mode], quadratic: bool, with_length: bool) -> Mode:
    if requested == Mode.QUADRATIC and not quadratic:
        logger.error("Quadratic mode requested for a non-quadratic system")
        raise ModeMismatchError("the system is not quadratic; use cubic or complete mode")
    if with_length:
        if requested == Mode.CUBIC:
            logger.warning("Length constraints are not supported with the cut; using complete mode")
            return Mode.COMPLETE
        if requested is None:
            return Mode.QUADRATIC if quadratic else Mode.COMPLETE
        return requested
    if requested is None:
        return Mode.QUADRATIC if quadratic else Mode.CUBIC
    return requested


def solve_problem(problem: Problem, settings: Optional[SolverSettings] = None) -> SolveResult:
    """Preprocess, encode, run the loop and verify the answer."""
    settings = settings or SolverSettings()
    start = time.monotonic()

    def elapsed() -> float:
        return (time.monotonic() - start) * 1000

    formula = problem.formula
    original_vars = problem.all_variables()
    constant_names = sorted(set(problem.alphabet) | set(_formula_constants(formula)))
    constants = [Sym(SymKind.CONST, c) for c in constant_names]
    word_part, length_part = split_constraints(formula)
    with_length = any(isinstance(lit, LenLit) for lit in iter_literals(length_part))
    names = FreshNames(original_vars)
    word_part = eliminate_inequalities(word_part, constants, names)
    try:
        cnf = to_cnf(word_part, settings.cnf_cap)
    except CnfCapExceeded:
        return SolveResult(verdict=Verdict.UNKNOWN, reason=UnknownReason.CNF_CAP, time_ms=elapsed())
    if cnf is None:
        logger.info("Word constraints are trivially unsatisfiable")
        return SolveResult(verdict=Verdict.UNSAT, time_ms=elapsed())

    mode = select_mode(settings.mode, is_quadratic(cnf), with_length)
    if mode != Mode.QUADRATIC:
        cnf = to_cubic(cnf, names)
    system = len(cnf.clauses) > 1 or mode == Mode.CUBIC
    logger.info(f"Solving in {mode.value} mode: {len(cnf.clauses)} clauses, system={system}, length={with_length}")

    variables = sorted(set(original_vars) | {x.name for x in cnf.variables()})
    symbols = constants + [Sym(SymKind.VAR, name) for name in variables]
    order = tuple(variables) if with_length else None
    if with_length and not constants:
        logger.info("No constants: every variable can only be empty")
        length_part = conj([length_part] + [LenLit(atom=LenAtom(coefficients={v: 1}, bound=0)) for v in variables])
    alphabet = problem_alphabet(symbols, delimited=system, width=len(order) if with_length else None)
    initial = cnf_encode(cnf, alphabet)
    if with_length:
        lengths = formula_to_fa(length_part, order)
        initial = initial.concat(Fa.word([LENSEP], alphabet)).concat(lengths.with_alphabet(alphabet))
        destination = dest_set(DestKind.LENGTH, alphabet, system=system)
    else:
        destination = dest_set(DestKind.SYSTEM if system else DestKind.SINGLE, alphabet)

    rmc = RmcProblem(initial=initial, destination=destination, mode=mode, system=system, length_order=order,
                     max_iterations=settings.max_iterations, timeout_s=settings.timeout_s,
                     trace_dir=settings.trace_dir)
    result, _ = rmc_solve(rmc)
    if result.verdict == Verdict.SAT:
        model = {name: result.model.get(name, "") for name in original_vars}
        if not verify_model(formula, model):
            logger.error(f"Extracted model does not satisfy the constraint: {model}")
            raise ExtractionError("extracted model fails verification")
        result = result.model_copy(update={"model": model})
    result = result.model_copy(update={"time_ms": elapsed()})
    logger.info(f"Verdict {result.verdict.value} after {result.iterations} iterations in {result.time_ms:.0f} ms")
    return result


def solve_formula(formula, settings: Optional[SolverSettings] = None, alphabet: Sequence[str] = (),
                  variables: Sequence[str] = ()) -> SolveResult:
    problem = Problem(alphabet=tuple(alphabet), variables=tuple(variables), formula=formula)
    return solve_problem(problem, settings)
