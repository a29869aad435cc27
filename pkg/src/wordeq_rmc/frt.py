"""
Finite-alphabet register transducers.

An FRT reads 2-track letters and writes 2-track letters, one output letter per input
letter. Each register holds a single symbol (or nothing). A rule fires from a control
state when its guard holds for the input letter, the register valuation and the
emitted letter; it then updates the registers simultaneously.

Guessed registers start with every alphabet symbol of the given kinds, so one FRT stands
for the union over all those choices. ``pin`` fixes some of them.
"""
import logging
from collections import deque
from dataclasses import dataclass
from itertools import product
from typing import (Callable, Dict, FrozenSet, Hashable, Iterable, Iterator, List, Mapping, Optional,
                    Sequence, Tuple, Union)

try:
    from .automata import Fa, FaBuilder
    from .errors import AlphabetMismatchError
    from .symbols import (DELI, Letter, Pair, Sym, SymKind, format_letter, is_pair, letter_symbols,
                          pair_letters, sorted_letters, sorted_syms)
    from .transducer import Transducer, TransducerBuilder
except ImportError:
    from automata import Fa, FaBuilder
    from errors import AlphabetMismatchError
    from symbols import (DELI, Letter, Pair, Sym, SymKind, format_letter, is_pair, letter_symbols,
                         pair_letters, sorted_letters, sorted_syms)
    from transducer import Transducer, TransducerBuilder

logger = logging.getLogger(__name__)

PASSTHROUGH = ("passthrough",)


@dataclass(frozen=True)
class In:
    """Component of the input letter (0 top, 1 bottom)."""
    track: int


@dataclass(frozen=True)
class Out:
    """Component of the emitted letter."""
    track: int


@dataclass(frozen=True)
class Reg:
    name: str


@dataclass(frozen=True)
class Lit:
    """A literal symbol; ``Lit(None)`` clears a register."""
    sym: Optional[Sym]


@dataclass(frozen=True)
class Free:
    """Any alphabet symbol of the given kinds (outputs only)."""
    kinds: FrozenSet[SymKind]


Term = Union[In, Out, Reg, Lit, Free]


@dataclass(frozen=True)
class IsKind:
    term: Term
    kinds: FrozenSet[SymKind]


@dataclass(frozen=True)
class Equal:
    """Both terms are set and equal."""
    left: Term
    right: Term


@dataclass(frozen=True)
class Negate:
    arg: "Guard"


@dataclass(frozen=True)
class AllOf:
    args: Tuple["Guard", ...] = ()


@dataclass(frozen=True)
class AnyOf:
    args: Tuple["Guard", ...] = ()


Guard = Union[IsKind, Equal, Negate, AllOf, AnyOf]
TRUE = AllOf(())


@dataclass(frozen=True)
class FrtRule:
    source: Hashable
    target: Hashable
    guard: Guard
    output: Tuple[Term, Term]
    update: Tuple[Tuple[str, Term], ...] = ()


def conjoin(*guards: Guard) -> Guard:
    args = []
    for g in guards:
        if isinstance(g, AllOf):
            args.extend(g.args)
        else:
            args.append(g)
    return args[0] if len(args) == 1 else AllOf(tuple(args))


# -- compilation of terms and guards ----------------------------------------------------

Env = Callable[[Optional[Pair], tuple, Optional[Pair]], Optional[Sym]]


def _term_fn(term: Term, index: Mapping[str, int]) -> Env:
    if isinstance(term, In):
        k = term.track
        return lambda letter, val, out: letter[k]
    if isinstance(term, Out):
        k = term.track
        return lambda letter, val, out: out[k]
    if isinstance(term, Reg):
        i = index[term.name]
        return lambda letter, val, out: val[i]
    if isinstance(term, Lit):
        sym = term.sym
        return lambda letter, val, out: sym
    raise TypeError(f"term {term!r} cannot be evaluated here")


def _guard_fn(guard: Guard, index: Mapping[str, int]) -> Callable[[Optional[Pair], tuple, Optional[Pair]], bool]:
    if isinstance(guard, IsKind):
        f = _term_fn(guard.term, index)
        kinds = guard.kinds

        def is_kind(letter, val, out):
            s = f(letter, val, out)
            return s is not None and s.kind in kinds
        return is_kind
    if isinstance(guard, Equal):
        f, g = _term_fn(guard.left, index), _term_fn(guard.right, index)

        def equal(letter, val, out):
            s = f(letter, val, out)
            return s is not None and s == g(letter, val, out)
        return equal
    if isinstance(guard, Negate):
        inner = _guard_fn(guard.arg, index)
        return lambda letter, val, out: not inner(letter, val, out)
    if isinstance(guard, AllOf):
        parts = [_guard_fn(g, index) for g in guard.args]
        return lambda letter, val, out: all(p(letter, val, out) for p in parts)
    if isinstance(guard, AnyOf):
        parts = [_guard_fn(g, index) for g in guard.args]
        return lambda letter, val, out: any(p(letter, val, out) for p in parts)
    raise TypeError(f"unknown guard {guard!r}")


class _CompiledRule:
    __slots__ = ("rule", "guard", "outputs", "updates")

    def __init__(self, rule: FrtRule, index: Mapping[str, int]):
        self.rule = rule
        self.guard = _guard_fn(rule.guard, index)
        self.outputs = tuple(t if isinstance(t, Free) else _term_fn(t, index) for t in rule.output)
        self.updates = tuple((index[name], _term_fn(term, index)) for name, term in rule.update)


# -- formatting ----------------------------------------------------------------------------

def format_term(term: Term) -> str:
    if isinstance(term, In):
        return "in.top" if term.track == 0 else "in.bot"
    if isinstance(term, Out):
        return "out.top" if term.track == 0 else "out.bot"
    if isinstance(term, Reg):
        return term.name
    if isinstance(term, Lit):
        return "⊥" if term.sym is None else term.sym.name
    return "any{" + ",".join(sorted(k.value for k in term.kinds)) + "}"


def format_guard(guard: Guard) -> str:
    if isinstance(guard, IsKind):
        return f"{format_term(guard.term)}∈{{{','.join(sorted(k.value for k in guard.kinds))}}}"
    if isinstance(guard, Equal):
        return f"{format_term(guard.left)}={format_term(guard.right)}"
    if isinstance(guard, Negate):
        if isinstance(guard.arg, Equal):
            return f"{format_term(guard.arg.left)}≠{format_term(guard.arg.right)}"
        return f"¬({format_guard(guard.arg)})"
    if isinstance(guard, AllOf):
        if not guard.args:
            return "true"
        return " ∧ ".join(_wrap(g) for g in guard.args)
    return " ∨ ".join(_wrap(g) for g in guard.args)


def _wrap(guard: Guard) -> str:
    text = format_guard(guard)
    return f"({text})" if isinstance(guard, (AllOf, AnyOf)) and len(guard.args) > 1 else text


# -- the transducer ---------------------------------------------------------------------------

class Frt:
    """A finite-alphabet register transducer over 2-track letters."""

    def __init__(self, registers: Sequence[str], rules: Iterable[FrtRule], initial: Hashable,
                 final: Iterable[Hashable], guessed: Optional[Mapping[str, FrozenSet[SymKind]]] = None,
                 init_guard: Guard = TRUE, fixed: Optional[Mapping[str, Sym]] = None, tag=None):
        self.registers: Tuple[str, ...] = tuple(registers)
        self.rules: Tuple[FrtRule, ...] = tuple(rules)
        self.initial = initial
        self.final: FrozenSet[Hashable] = frozenset(final)
        self.guessed: Dict[str, FrozenSet[SymKind]] = dict(guessed or {})
        self.init_guard = init_guard
        self.fixed: Dict[str, Sym] = dict(fixed or {})
        self.tag = tag
        self._index = {name: k for k, name in enumerate(self.registers)}
        unknown = (set(self.guessed) | set(self.fixed)) - set(self._index)
        if unknown:
            raise ValueError(f"unknown registers: {sorted(unknown)}")
        self._by_source: Dict[Hashable, List[_CompiledRule]] = {}
        for rule in self.rules:
            self._by_source.setdefault(rule.source, []).append(_CompiledRule(rule, self._index))
        self._init_check = _guard_fn(init_guard, self._index)

    @property
    def states(self) -> FrozenSet[Hashable]:
        found = {self.initial} | set(self.final)
        for rule in self.rules:
            found.add(rule.source)
            found.add(rule.target)
        return frozenset(found)

    def pin(self, values: Mapping[str, Sym], tag=None) -> "Frt":
        """Fix guessed registers to the given symbols."""
        fixed = dict(self.fixed)
        fixed.update(values)
        return Frt(self.registers, self.rules, self.initial, self.final, self.guessed,
                   self.init_guard, fixed, tag if tag is not None else self.tag)

    def output_literals(self) -> FrozenSet[Sym]:
        found = set()
        for rule in self.rules:
            for term in rule.output:
                if isinstance(term, Lit) and term.sym is not None:
                    found.add(term.sym)
        return frozenset(found)

    def initial_valuations(self, symbols: Iterable[Sym]) -> List[tuple]:
        """Register valuations at the start, for the given symbol set."""
        symbols = sorted_syms(set(symbols))
        choices = []
        for name in self.registers:
            if name in self.fixed:
                choices.append([self.fixed[name]])
            elif name in self.guessed:
                kinds = self.guessed[name]
                choices.append([s for s in symbols if s.kind in kinds])
            else:
                choices.append([None])
        return [val for val in product(*choices) if self._init_check(None, val, None)]

    def fire(self, state: Hashable, letter: Pair, val: tuple,
             symbols: Sequence[Sym]) -> Iterator[Tuple[Pair, tuple, Hashable]]:
        """Every ``(output letter, new valuation, target)`` for one input letter."""
        for rule in self._by_source.get(state, ()):
            candidates = []
            for term in rule.outputs:
                if isinstance(term, Free):
                    candidates.append([s for s in symbols if s.kind in term.kinds])
                else:
                    s = term(letter, val, None)
                    if s is None:
                        break
                    candidates.append([s])
            else:
                for out in product(*candidates):
                    if not rule.guard(letter, val, out):
                        continue
                    new_val = list(val)
                    for k, fn in rule.updates:
                        new_val[k] = fn(letter, val, out)
                    yield out, tuple(new_val), rule.rule.target

    def expand(self, symbols: Iterable[Sym], tag=None) -> Transducer:
        """The explicit transducer over all pair letters of ``symbols``."""
        symbols = set(symbols)
        letters = sorted_letters(pair_letters(symbols, delimited=DELI in symbols))
        syms = sorted_syms(letter_symbols(letters))
        builder = TransducerBuilder(letters, tag=tag if tag is not None else self.tag)
        queue = deque()
        for val in self.initial_valuations(syms):
            key = (self.initial, val)
            builder.initial.add(builder.state(key))
            queue.append(key)
        while queue:
            key = queue.popleft()
            state, val = key
            sid = builder.state(key)
            if state in self.final:
                builder.final.add(sid)
            for letter in letters:
                if not is_pair(letter):
                    continue
                for out, new_val, target in self.fire(state, letter, val, syms):
                    nxt = (target, new_val)
                    if nxt not in builder:
                        queue.append(nxt)
                    builder.add(sid, letter, out, builder.state(nxt))
        return builder.build()

    def image(self, lang: Fa, passthrough: Optional[Letter] = None) -> Fa:
        """Lazy image of ``L(lang)``; only valuations reachable on ``lang`` are explored.

        With ``passthrough`` set, reading that letter in a final state switches to copying
        the rest of the word unchanged.
        """
        source = lang.remove_epsilon().trim()
        symbols = sorted_syms(s for s in letter_symbols(source.alphabet))
        builder = FaBuilder(source.alphabet)
        cache: Dict[tuple, list] = {}
        queue = deque()
        for q in sorted(source.initial):
            for val in self.initial_valuations(symbols):
                key = (q, self.initial, val)
                builder.initial.add(builder.state(key))
                queue.append(key)
        while queue:
            key = queue.popleft()
            q, state, val = key
            sid = builder.state(key)
            if q in source.final and (state == PASSTHROUGH or state in self.final):
                builder.final.add(sid)
            for letter, dsts in source.delta[q].items():
                if state == PASSTHROUGH:
                    moves = [(letter, None, PASSTHROUGH)]
                elif letter == passthrough:
                    moves = [(letter, None, PASSTHROUGH)] if state in self.final else []
                elif not is_pair(letter):
                    moves = []
                else:
                    ckey = (state, letter, val)
                    if ckey not in cache:
                        cache[ckey] = list(self.fire(state, letter, val, symbols))
                    moves = cache[ckey]
                for out, new_val, target in moves:
                    if out not in source.alphabet:
                        raise AlphabetMismatchError(f"produced letter {format_letter(out)} outside the alphabet")
                    for q2 in dsts:
                        nxt = (q2, target, new_val)
                        if nxt not in builder:
                            queue.append(nxt)
                        builder.add(sid, out, builder.state(nxt))
        return builder.build().trim()

    def preimage(self, target: Fa, restrict: Optional[Fa] = None, passthrough: Optional[Letter] = None) -> Fa:
        """Inputs related to some word of ``target``, intersected with ``restrict`` when given."""
        goal = target.remove_epsilon().trim()
        domain = (restrict if restrict is not None else Fa.universal(goal.alphabet)).remove_epsilon().trim()
        symbols = sorted_syms(letter_symbols(domain.alphabet | goal.alphabet))
        builder = FaBuilder(domain.alphabet)
        cache: Dict[tuple, list] = {}
        queue = deque()
        for r, q in product(sorted(domain.initial), sorted(goal.initial)):
            for val in self.initial_valuations(symbols):
                key = (r, q, self.initial, val)
                builder.initial.add(builder.state(key))
                queue.append(key)
        while queue:
            key = queue.popleft()
            r, q, state, val = key
            sid = builder.state(key)
            if r in domain.final and q in goal.final and (state == PASSTHROUGH or state in self.final):
                builder.final.add(sid)
            for letter, rdsts in domain.delta[r].items():
                if state == PASSTHROUGH:
                    moves = [(letter, None, PASSTHROUGH)]
                elif letter == passthrough:
                    moves = [(letter, None, PASSTHROUGH)] if state in self.final else []
                elif not is_pair(letter):
                    moves = []
                else:
                    ckey = (state, letter, val)
                    if ckey not in cache:
                        cache[ckey] = list(self.fire(state, letter, val, symbols))
                    moves = cache[ckey]
                for out, new_val, nstate in moves:
                    for q2 in goal.delta[q].get(out, ()):
                        for r2 in rdsts:
                            nxt = (r2, q2, nstate, new_val)
                            if nxt not in builder:
                                queue.append(nxt)
                            builder.add(sid, letter, builder.state(nxt))
        return builder.build().trim()

    def to_dot(self, name: str = "frt") -> str:
        """DOT text; edge labels read ``action; condition; register update``."""
        order: Dict[Hashable, int] = {self.initial: 0}
        queue = deque([self.initial])
        while queue:
            s = queue.popleft()
            for compiled in self._by_source.get(s, ()):
                t = compiled.rule.target
                if t not in order:
                    order[t] = len(order)
                    queue.append(t)
        lines = [f"digraph {name} {{", "  rankdir=LR;"]
        for s, k in order.items():
            shape = "doublecircle" if s in self.final else "circle"
            lines.append(f"  q{k} [shape={shape}];")
        lines.append("  start [shape=point];")
        lines.append("  start -> q0;")
        for s, k in order.items():
            for compiled in self._by_source.get(s, ()):
                rule = compiled.rule
                action = f"{format_term(rule.output[0])}/{format_term(rule.output[1])}"
                update = ", ".join(f"{n}:={format_term(t)}" for n, t in rule.update) or "-"
                label = f"{action}; {format_guard(rule.guard)}; {update}"
                lines.append(f'  q{k} -> q{order[rule.target]} [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:
        return f"Frt(rules={len(self.rules)}, registers={len(self.registers)}, tag={self.tag})"


def identity_frt() -> Frt:
    """Copies every letter unchanged."""
    rule = FrtRule("q", "q", TRUE, (In(0), In(1)))
    return Frt((), [rule], "q", ["q"])
