"""
Nielsen proof-step relations on encoded configurations.

A step is a substitution FRT (``x -> a x`` or ``x -> ε``, at most ``n`` occurrences of
``x`` per equation) followed by trimming. The single-equation step guards on the first
letter; the system step skips solved equations, applies the guarded step to the first
unsolved one and the unguarded substitution to every later equation.
"""
import logging
from enum import Enum
from functools import lru_cache
from typing import FrozenSet, Hashable, Iterable, List, NamedTuple, Optional, Sequence, Tuple

try:
    from .automata import Fa, FaBuilder
    from .frt import (AllOf, AnyOf, Equal, Free, Frt, FrtRule, Guard, In, IsKind, Lit, Negate, Out, Reg, Term,
                      conjoin)
    from .models import EquationSystem, WordEquation
    from .symbols import (DELI, DELI_PAIR, PAD, PAD_PAIR, WORD_KINDS, Letter, Sym, SymKind, is_pair,
                          letter_symbols, pair_letters, sorted_letters, sym_key)
    from .transducer import Transducer, TransducerBuilder
except ImportError:
    from automata import Fa, FaBuilder
    from frt import (AllOf, AnyOf, Equal, Free, Frt, FrtRule, Guard, In, IsKind, Lit, Negate, Out, Reg, Term,
                     conjoin)
    from models import EquationSystem, WordEquation
    from symbols import (DELI, DELI_PAIR, PAD, PAD_PAIR, WORD_KINDS, Letter, Sym, SymKind, is_pair,
                         letter_symbols, pair_letters, sorted_letters, sym_key)
    from transducer import Transducer, TransducerBuilder

logger = logging.getLogger(__name__)

PAD_KIND = frozenset({SymKind.PAD})
DELI_KIND = frozenset({SymKind.DELI})
VAR_KIND = frozenset({SymKind.VAR})


class RuleKind(str, Enum):
    """Kinds of proof-step rules."""
    VAR_EPS = "var-eps"
    VAR_PREPEND = "var-prepend"
    CUT = "cut"
    EPS_ANY = "eps-any"
    PREPEND_ANY = "prepend-any"


_KIND_ORDER = {RuleKind.VAR_EPS: 0, RuleKind.VAR_PREPEND: 1, RuleKind.CUT: 2,
               RuleKind.EPS_ANY: 3, RuleKind.PREPEND_ANY: 4}


class RuleTag(NamedTuple):
    """Label of a rule transducer: the rule kind and its variable / prepended symbol."""
    kind: RuleKind
    var: Optional[Sym] = None
    alpha: Optional[Sym] = None

    def sort_key(self) -> tuple:
        return (_KIND_ORDER[self.kind],
                sym_key(self.var) if self.var else (-1, ""),
                sym_key(self.alpha) if self.alpha else (-1, ""))

    def __str__(self) -> str:
        if self.kind == RuleKind.VAR_EPS:
            return f"{self.var.name}→ε"
        if self.kind == RuleKind.VAR_PREPEND:
            return f"{self.var.name}→{self.alpha.name}{self.var.name}"
        if self.kind == RuleKind.CUT:
            return f"cut {self.var.name}"
        return "x→ε (any)" if self.kind == RuleKind.EPS_ANY else "x→αx (any)"


def var_eps(x: Sym) -> RuleTag:
    return RuleTag(RuleKind.VAR_EPS, x)


def var_prepend(x: Sym, alpha: Sym) -> RuleTag:
    return RuleTag(RuleKind.VAR_PREPEND, x, alpha)


def cut_tag(v: Sym) -> RuleTag:
    return RuleTag(RuleKind.CUT, v)


def concrete_tags(variables: Iterable[Sym], constants: Iterable[Sym]) -> List[RuleTag]:
    """All single-rule tags in extraction order: every x→ε, then x→αx by (x, α)."""
    variables = sorted(set(variables), key=sym_key)
    constants = sorted(set(constants), key=sym_key)
    tags = [var_eps(x) for x in variables]
    for x in variables:
        for alpha in constants + variables:
            if alpha != x:
                tags.append(var_prepend(x, alpha))
    return sorted(tags, key=RuleTag.sort_key)


# -- trimming -----------------------------------------------------------------------------

def _is_trimmable(letter: Letter) -> bool:
    return is_pair(letter) and letter[0] == letter[1] and letter[0].kind in WORD_KINDS


@lru_cache(maxsize=64)
def build_trim(alphabet: FrozenSet[Letter]) -> Transducer:
    """Deletes a prefix of equal pairs from every equation, copying the rest.

    State 0 is "at the start of an equation", state 1 is "inside". The amount trimmed is
    nondeterministic; ``trim_normal_filter`` keeps only maximal trims.
    """
    builder = TransducerBuilder(alphabet)
    start, inside = builder.state("start"), builder.state("inside")
    builder.initial.add(start)
    builder.final.update((start, inside))
    for letter in sorted_letters(alphabet):
        if letter == DELI_PAIR:
            builder.add(start, letter, letter, start)
            builder.add(inside, letter, letter, start)
            continue
        if _is_trimmable(letter):
            builder.add(start, letter, None, start)
        builder.add(start, letter, letter, inside)
        builder.add(inside, letter, letter, inside)
    return builder.build()


@lru_cache(maxsize=64)
def trim_normal_filter(alphabet: FrozenSet[Letter]) -> Fa:
    """Words in which no equation starts with an equal non-pad pair."""
    builder = FaBuilder(alphabet)
    start, inside, rest = builder.state("start"), builder.state("inside"), builder.state("rest")
    builder.initial.add(start)
    builder.final.update((start, inside, rest))
    for letter in alphabet:
        builder.add(rest, letter, rest)
        if not is_pair(letter):
            builder.add(start, letter, rest)
            builder.add(inside, letter, rest)
        elif letter == DELI_PAIR:
            builder.add(start, letter, start)
            builder.add(inside, letter, start)
        else:
            if not _is_trimmable(letter):
                builder.add(start, letter, inside)
            builder.add(inside, letter, inside)
    return builder.build()


# -- substitution FRTs ------------------------------------------------------------------------

class _TrackMove(NamedTuple):
    guard: Guard
    output: Term
    update: Tuple[Tuple[str, Term], ...]
    target: Hashable
    hits: int


def _shift(queue: Sequence[str], length: int) -> Tuple[Tuple[str, Term], ...]:
    return tuple((queue[k], Reg(queue[k + 1])) for k in range(length - 1))


def _prepend_moves(track: int, length: int, queue: Sequence[str], bound: int) -> List[_TrackMove]:
    """Right shift: each x becomes ``a x``; displaced symbols wait in the queue."""
    inp, x, alpha = In(track), Reg("x"), Reg("a")
    is_x = Equal(inp, x)
    moves = []
    if length + 1 <= bound:
        if length == 0:
            moves.append(_TrackMove(is_x, alpha, ((queue[0], inp),), 1, 1))
        else:
            update = _shift(queue, length) + ((queue[length - 1], alpha), (queue[length], inp))
            moves.append(_TrackMove(is_x, Reg(queue[0]), update, length + 1, 1))
    other = conjoin(IsKind(inp, WORD_KINDS), Negate(is_x))
    pad = IsKind(inp, PAD_KIND)
    if length == 0:
        moves.append(_TrackMove(other, inp, (), 0, 0))
        moves.append(_TrackMove(pad, Lit(PAD), (), 0, 0))
    else:
        head = Reg(queue[0])
        moves.append(_TrackMove(other, head, _shift(queue, length) + ((queue[length - 1], inp),), length, 0))
        moves.append(_TrackMove(pad, head, _shift(queue, length) + ((queue[length - 1], Lit(None)),),
                                length - 1, 0))
    return moves


def _eps_moves(track: int, state: Tuple[int, bool], queue: Sequence[str], bound: int) -> List[_TrackMove]:
    """Left shift by guess and verify.

    Emitted symbols that the input has not yet produced wait in the queue as promises;
    ``done`` records that the output already ended (only pads follow).
    """
    length, done = state
    inp, out, x = In(track), Out(track), Reg("x")
    is_x = Equal(inp, x)
    fresh = Negate(Equal(out, x))
    moves = []
    if done:
        moves.append(_TrackMove(is_x, Lit(PAD), (), state, 1))
    else:
        if length + 1 <= bound:
            moves.append(_TrackMove(conjoin(is_x, fresh), Free(WORD_KINDS), ((queue[length], out),),
                                    (length + 1, False), 1))
        moves.append(_TrackMove(is_x, Lit(PAD), (), (length, True), 1))
    if length == 0:
        if not done:
            moves.append(_TrackMove(conjoin(IsKind(inp, WORD_KINDS), Negate(is_x)), inp, (), state, 0))
        moves.append(_TrackMove(IsKind(inp, PAD_KIND), Lit(PAD), (), (0, True), 0))
    else:
        verified = Equal(inp, Reg(queue[0]))
        popped = _shift(queue, length) + ((queue[length - 1], Lit(None)),)
        if not done:
            moves.append(_TrackMove(conjoin(verified, fresh), Free(WORD_KINDS),
                                    _shift(queue, length) + ((queue[length - 1], out),), (length, False), 0))
        moves.append(_TrackMove(verified, Lit(PAD), popped, (length - 1, True), 0))
    return moves


def _track_empty(state) -> bool:
    return (state if isinstance(state, int) else state[0]) == 0


def _head_guard(prepend: bool) -> Guard:
    x = Reg("x")
    if prepend:
        a = Reg("a")
        return AnyOf((AllOf((Equal(In(0), x), Equal(In(1), a))),
                      AllOf((Equal(In(0), a), Equal(In(1), x)))))
    return AnyOf((Equal(In(0), x), Equal(In(1), x)))


def _substitution_frt(prepend: bool, bound: int, guarded: bool, system: bool, tag: RuleTag) -> Frt:
    """Generate the substitution FRT for one rule kind.

    Control states are ``(phase, count, top, bottom)`` where ``count`` is the number of
    occurrences of x seen in the current equation and ``top``/``bottom`` are the per-track
    shift states. Phases: ``pass`` skips solved equations, ``start`` waits for the guarded
    first letter, ``body`` is the rest of the stepped equation, ``tail`` the later ones.
    """
    if bound < 1:
        raise ValueError("occurrence bound must be at least 1")
    tops = [f"t{k}" for k in range(1, bound + 1)]
    bots = [f"b{k}" for k in range(1, bound + 1)]
    registers = ["x"] + (["a"] if prepend else []) + tops + bots
    track_init = 0 if prepend else (0, False)

    def moves(track, state):
        queue = tops if track == 0 else bots
        return (_prepend_moves if prepend else _eps_moves)(track, state, queue, bound)

    def combined(src, phase, extra_guard=None):
        _, count, s0, s1 = src
        found = []
        for m0 in moves(0, s0):
            for m1 in moves(1, s1):
                hits = count + m0.hits + m1.hits
                if hits > bound:
                    continue
                guards = [m0.guard, m1.guard] if extra_guard is None else [extra_guard, m0.guard, m1.guard]
                found.append(FrtRule(src, (phase, hits, m0.target, m1.target), conjoin(*guards),
                                     (m0.output, m1.output), m0.update + m1.update))
        return found

    copy = (In(0), In(1))
    if system:
        start = ("pass", 0, track_init, track_init)
    elif guarded:
        start = ("start", 0, track_init, track_init)
    else:
        start = ("body", 0, track_init, track_init)
    rules: List[FrtRule] = []
    final = set()
    seen = {start}
    queue = [start]
    while queue:
        state = queue.pop()
        phase, _, s0, s1 = state
        new_rules: List[FrtRule] = []
        if phase == "pass":
            new_rules.append(FrtRule(state, state, AllOf((IsKind(In(0), PAD_KIND), IsKind(In(1), PAD_KIND))), copy))
            new_rules.append(FrtRule(state, state, IsKind(In(0), DELI_KIND), copy))
        if phase in ("pass", "start"):
            new_rules.extend(combined(state, "body", _head_guard(prepend)))
        else:
            new_rules.extend(combined(state, phase))
            if _track_empty(s0) and _track_empty(s1):
                final.add(state)
                if system:
                    new_rules.append(FrtRule(state, ("tail", 0, track_init, track_init),
                                             IsKind(In(0), DELI_KIND), copy))
        for rule in new_rules:
            if rule.target not in seen:
                seen.add(rule.target)
                queue.append(rule.target)
        rules.extend(new_rules)
    guessed = {"x": VAR_KIND}
    init_guard = AllOf(())
    if prepend:
        guessed["a"] = WORD_KINDS
        init_guard = Negate(Equal(Reg("a"), Reg("x")))
    logger.debug(f"Built {'prepend' if prepend else 'eps'} FRT: bound={bound}, "
                 f"guarded={guarded}, system={system}, rules={len(rules)}")
    return Frt(registers, rules, start, final, guessed=guessed, init_guard=init_guard, tag=tag)


@lru_cache(maxsize=32)
def build_subst_prepend(bound: int) -> Frt:
    """``x -> a x`` for every variable x and symbol a != x, at most ``bound`` occurrences."""
    return _substitution_frt(True, bound, guarded=False, system=False, tag=RuleTag(RuleKind.PREPEND_ANY))


@lru_cache(maxsize=32)
def build_subst_eps(bound: int) -> Frt:
    """``x -> ε`` for every variable x, at most ``bound`` occurrences."""
    return _substitution_frt(False, bound, guarded=False, system=False, tag=RuleTag(RuleKind.EPS_ANY))


class NielsenStep:
    """A guarded substitution FRT followed by trimming."""

    def __init__(self, frt: Frt, tag: RuleTag):
        self.frt = frt
        self.tag = tag

    def pinned(self, tag: RuleTag) -> "NielsenStep":
        """The member of this family for one concrete rule."""
        values = {"x": tag.var}
        if tag.kind == RuleKind.VAR_PREPEND:
            values["a"] = tag.alpha
        return NielsenStep(self.frt.pin(values, tag=tag), tag)

    def substitute(self, lang: Fa, passthrough: Optional[Letter] = None) -> Fa:
        """The substitution alone, before trimming."""
        return self.frt.image(lang, passthrough)

    def image(self, lang: Fa) -> Fa:
        alphabet = lang.alphabet
        substituted = self.frt.image(lang)
        trimmed = build_trim(alphabet).image(substituted, alphabet)
        return trimmed.intersect(trim_normal_filter(alphabet))

    def preimage(self, target: Fa, restrict: Fa) -> Fa:
        alphabet = restrict.alphabet
        untrimmed = build_trim(alphabet).preimage(target.with_alphabet(alphabet), alphabet)
        return self.frt.preimage(untrimmed, restrict)

    def to_transducer(self, symbols: Iterable[Sym]) -> Transducer:
        """Explicit transducer (substitution then trim) over the given symbols."""
        expanded = self.frt.expand(symbols, tag=self.tag)
        return build_trim(expanded.alphabet).compose(expanded).retag(self.tag)

    def __repr__(self) -> str:
        return f"NielsenStep({self.tag}, {self.frt!r})"


@lru_cache(maxsize=32)
def build_step_single(bound: int) -> Tuple[NielsenStep, NielsenStep]:
    """The ε-family and the prepend-family for one equation."""
    eps = _substitution_frt(False, bound, guarded=True, system=False, tag=RuleTag(RuleKind.EPS_ANY))
    prepend = _substitution_frt(True, bound, guarded=True, system=False, tag=RuleTag(RuleKind.PREPEND_ANY))
    return NielsenStep(eps, eps.tag), NielsenStep(prepend, prepend.tag)


@lru_cache(maxsize=32)
def build_step_system(bound: int) -> Tuple[NielsenStep, NielsenStep]:
    """Like ``build_step_single`` but over ``#``-separated systems."""
    eps = _substitution_frt(False, bound, guarded=True, system=True, tag=RuleTag(RuleKind.EPS_ANY))
    prepend = _substitution_frt(True, bound, guarded=True, system=True, tag=RuleTag(RuleKind.PREPEND_ANY))
    return NielsenStep(eps, eps.tag), NielsenStep(prepend, prepend.tag)


# -- the quartic-to-cubic cut ---------------------------------------------------------------

def _letter_count(letter: Letter, x: Sym) -> int:
    if not is_pair(letter):
        return 0
    return (letter[0] == x) + (letter[1] == x)


def occurrence_fa(x: Sym, alphabet: FrozenSet[Letter], allowed: FrozenSet[int]) -> Fa:
    """Words in which x occurs (over both tracks) a number of times in ``allowed``."""
    cap = max(allowed) + 1
    builder = FaBuilder(alphabet)
    states = [builder.state(k) for k in range(cap)]
    builder.initial.add(states[0])
    builder.final.update(states[k] for k in allowed)
    for letter in alphabet:
        n = _letter_count(letter, x)
        for k in range(cap):
            if k + n < cap:
                builder.add(states[k], letter, states[k + n])
    return builder.build()


def _restrict(lang: Fa, constraints: Iterable[Fa]) -> Fa:
    result = lang
    for constraint in constraints:
        if result.is_empty():
            break
        result = result.intersect(constraint).normalize()
    return result


class CutRelation:
    """Replaces two occurrences of a quartic variable x by v and appends ``x = v``.

    Cubic configurations pass unchanged; configurations with a variable occurring five or
    more times, or two quartic variables, have no image.
    """

    def __init__(self, v: Sym, variables: Iterable[Sym], alphabet: FrozenSet[Letter]):
        self.v = v
        self.variables = sorted(set(variables) - {v}, key=sym_key)
        self.alphabet = frozenset(alphabet)
        extra = {letter for letter in self.alphabet if not is_pair(letter)}
        symbols = letter_symbols(self.alphabet) | {v}
        self.extended = pair_letters(symbols, delimited=True) | extra
        self.tag = cut_tag(v)
        self._cubic = [occurrence_fa(x, self.alphabet, frozenset({0, 1, 2, 3})) for x in self.variables]

    def _quartic(self, x: Sym) -> List[Fa]:
        found = [occurrence_fa(x, self.alphabet, frozenset({4}))]
        found.extend(c for y, c in zip(self.variables, self._cubic) if y != x)
        return found

    def replacement(self, x: Sym) -> Transducer:
        """Rename the first two occurrences of x to v, then append ``#(x/v)(⋄/⋄)*``."""
        builder = TransducerBuilder(self.extended, tag=self.tag)
        counts = [builder.state(k) for k in range(3)]
        sep, eq = builder.state("sep"), builder.state("eq")
        builder.initial.add(counts[0])
        builder.final.add(eq)
        for letter in sorted_letters(self.alphabet):
            for k in range(3):
                if not is_pair(letter):
                    builder.add(counts[k], letter, letter, counts[k])
                    continue
                renamed, seen = [], k
                for sym in letter:
                    if sym == x and seen < 2:
                        renamed.append(self.v)
                        seen += 1
                    else:
                        renamed.append(sym)
                builder.add(counts[k], letter, tuple(renamed), counts[seen])
        builder.add(counts[2], None, DELI_PAIR, sep)
        builder.add(sep, None, (x, self.v), eq)
        builder.add(eq, None, PAD_PAIR, eq)
        return builder.build()

    def image(self, lang: Fa) -> Fa:
        lang = lang.with_alphabet(self.alphabet)
        result = _restrict(lang, self._cubic)
        used = False
        for x in self.variables:
            quartic = _restrict(lang, self._quartic(x))
            if quartic.is_empty():
                continue
            if not used:
                result = result.with_alphabet(self.extended)
                used = True
            result = result.union(self.replacement(x).image(quartic, self.extended))
        return result

    def preimage(self, target: Fa, restrict: Fa) -> Fa:
        restrict = restrict.with_alphabet(self.alphabet)
        result = _restrict(target.with_alphabet(self.alphabet).intersect(restrict), self._cubic)
        for x in self.variables:
            quartic = _restrict(restrict, self._quartic(x))
            if quartic.is_empty():
                continue
            undone = self.replacement(x).preimage(target.with_alphabet(self.extended), self.alphabet)
            result = result.union(undone.intersect(quartic))
        return result

    def as_transducer(self) -> Transducer:
        cubic = _restrict(Fa.universal(self.alphabet), self._cubic)
        relation = Transducer.identity(cubic, tag=self.tag)
        for x in self.variables:
            quartic = _restrict(Fa.universal(self.alphabet), self._quartic(x))
            relation = relation.union(self.replacement(x).compose(Transducer.identity(quartic)))
        return relation.retag(self.tag)


def build_cut(v: Sym, variables: Iterable[Sym], alphabet: Iterable[Letter]) -> CutRelation:
    if not v.is_var:
        raise ValueError(f"cut variable must be a variable, got {v}")
    return CutRelation(v, variables, frozenset(alphabet))


# -- term rewriting ---------------------------------------------------------------------------

def _trim_all(equations: Sequence[WordEquation]) -> Tuple[WordEquation, ...]:
    return tuple(e.trimmed() for e in equations)


def nielsen_successors(system: EquationSystem) -> List[Tuple[RuleTag, EquationSystem]]:
    """Nielsen successors by direct rewriting of the first unsolved equation."""
    equations = _trim_all(system.equations)
    current = next((e for e in equations if not e.is_empty()), None)
    if current is None:
        return []
    lhs, rhs = current.lhs, current.rhs
    heads = [s for s in (lhs[:1] + rhs[:1])]
    options: List[Tuple[RuleTag, Sym, Tuple[Sym, ...]]] = []
    for x in heads:
        if x.is_var:
            options.append((var_eps(x), x, ()))
    if lhs and rhs:
        a, b = lhs[0], rhs[0]
        if a.is_var:
            options.append((var_prepend(a, b), a, (b, a)))
        if b.is_var:
            options.append((var_prepend(b, a), b, (a, b)))
    results = {}
    for tag, x, replacement in options:
        rewritten = _trim_all([e.substitute(x, replacement) for e in equations])
        results[tag] = EquationSystem.conjunction(rewritten)
    return sorted(results.items(), key=lambda item: item[0].sort_key())
