"""
Finite automata over finite alphabets of track letters.

States are the integers ``0 .. n-1``. ``delta[s]`` maps a letter (or ``None`` for an
epsilon move) to the frozenset of successor states. Automata are immutable; every
operation returns a new automaton.
"""
import logging
from collections import deque
from itertools import product
from typing import Dict, FrozenSet, Hashable, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

try:
    from .errors import AlphabetMismatchError
    from .symbols import Letter, format_letter, letter_key, sorted_letters
except ImportError:
    from errors import AlphabetMismatchError
    from symbols import Letter, format_letter, letter_key, sorted_letters

logger = logging.getLogger(__name__)

Delta = Tuple[Dict[Optional[Letter], FrozenSet[int]], ...]


class FaBuilder:
    """Incremental construction of an automaton, with states named by hashable keys."""

    def __init__(self, alphabet: Iterable[Letter]):
        self.alphabet = frozenset(alphabet)
        self._ids: Dict[Hashable, int] = {}
        self._delta: List[Dict[Optional[Letter], Set[int]]] = []
        self.initial: Set[int] = set()
        self.final: Set[int] = set()

    def __len__(self) -> int:
        return len(self._delta)

    def __contains__(self, key: Hashable) -> bool:
        return key in self._ids

    def state(self, key: Hashable = None) -> int:
        """Return the id for ``key``, creating the state on first use."""
        if key is not None and key in self._ids:
            return self._ids[key]
        sid = len(self._delta)
        self._delta.append({})
        if key is not None:
            self._ids[key] = sid
        return sid

    def add(self, src: int, letter: Optional[Letter], dst: int) -> None:
        self._delta[src].setdefault(letter, set()).add(dst)

    def build(self, normalized: bool = False) -> "Fa":
        delta = tuple({a: frozenset(d) for a, d in row.items()} for row in self._delta)
        return Fa(self.alphabet, delta, self.initial, self.final, normalized=normalized)


class Fa:
    """A finite automaton, possibly nondeterministic and with epsilon moves."""

    __slots__ = ("alphabet", "delta", "initial", "final", "_normalized", "_useful")

    def __init__(self, alphabet: Iterable[Letter], delta: Sequence[Dict], initial: Iterable[int],
                 final: Iterable[int], normalized: bool = False):
        self.alphabet: FrozenSet[Letter] = frozenset(alphabet)
        self.delta: Delta = tuple(delta)
        self.initial: FrozenSet[int] = frozenset(initial)
        self.final: FrozenSet[int] = frozenset(final)
        self._normalized = normalized
        self._useful: Optional[FrozenSet[int]] = None

    # -- constructors -------------------------------------------------------------

    @classmethod
    def empty(cls, alphabet: Iterable[Letter] = ()) -> "Fa":
        return cls(alphabet, ({},), {0}, ())

    @classmethod
    def epsilon(cls, alphabet: Iterable[Letter] = ()) -> "Fa":
        """The language containing only the empty word."""
        return cls(alphabet, ({},), {0}, {0})

    @classmethod
    def word(cls, word: Sequence[Letter], alphabet: Optional[Iterable[Letter]] = None) -> "Fa":
        return cls.from_words([word], alphabet)

    @classmethod
    def from_words(cls, words: Iterable[Sequence[Letter]], alphabet: Optional[Iterable[Letter]] = None) -> "Fa":
        """Prefix-tree automaton of a finite set of words."""
        words = [tuple(w) for w in words]
        letters = set(alphabet) if alphabet is not None else {a for w in words for a in w}
        builder = FaBuilder(letters)
        root = builder.state(())
        builder.initial.add(root)
        for w in words:
            for k, letter in enumerate(w):
                if letter not in builder.alphabet:
                    raise AlphabetMismatchError(f"letter {format_letter(letter)} is not in the alphabet")
                builder.add(builder.state(w[:k]), letter, builder.state(w[:k + 1]))
            builder.final.add(builder.state(w))
        return builder.build()

    @classmethod
    def letters_star(cls, letters: Iterable[Letter], alphabet: Optional[Iterable[Letter]] = None) -> "Fa":
        """``S*`` for a set of letters ``S``."""
        letters = frozenset(letters)
        alphabet = frozenset(alphabet) if alphabet is not None else letters
        return cls(alphabet, ({a: frozenset({0}) for a in letters},), {0}, {0})

    @classmethod
    def universal(cls, alphabet: Iterable[Letter]) -> "Fa":
        return cls.letters_star(alphabet, alphabet)

    # -- basic queries ------------------------------------------------------------

    @property
    def num_states(self) -> int:
        return len(self.delta)

    @property
    def num_transitions(self) -> int:
        return sum(len(d) for row in self.delta for d in row.values())

    @property
    def is_normalized(self) -> bool:
        return self._normalized

    def transitions(self) -> Iterator[Tuple[int, Optional[Letter], int]]:
        for src, row in enumerate(self.delta):
            for letter, dsts in row.items():
                for dst in dsts:
                    yield src, letter, dst

    def has_epsilon(self) -> bool:
        return any(None in row for row in self.delta)

    def closure(self, states: Iterable[int]) -> FrozenSet[int]:
        """Epsilon closure of a set of states."""
        seen = set(states)
        stack = list(seen)
        while stack:
            s = stack.pop()
            for t in self.delta[s].get(None, ()):
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return frozenset(seen)

    def step(self, states: Iterable[int], letter: Letter) -> FrozenSet[int]:
        nxt = set()
        for s in states:
            nxt.update(self.delta[s].get(letter, ()))
        return self.closure(nxt)

    def accepts(self, word: Sequence[Letter]) -> bool:
        current = self.closure(self.initial)
        for letter in word:
            if letter not in self.alphabet:
                raise AlphabetMismatchError(f"letter {format_letter(letter)} is not in the alphabet")
            current = self.step(current, letter)
            if not current:
                return False
        return bool(current & self.final)

    def _reachable(self) -> Set[int]:
        seen = set(self.initial)
        stack = list(seen)
        while stack:
            s = stack.pop()
            for dsts in self.delta[s].values():
                for t in dsts:
                    if t not in seen:
                        seen.add(t)
                        stack.append(t)
        return seen

    def _coreachable(self) -> Set[int]:
        reverse: List[Set[int]] = [set() for _ in self.delta]
        for src, _, dst in self.transitions():
            reverse[dst].add(src)
        seen = set(self.final)
        stack = list(seen)
        while stack:
            s = stack.pop()
            for t in reverse[s]:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return seen

    def useful_states(self) -> FrozenSet[int]:
        """States that are both reachable and co-reachable."""
        if self._useful is None:
            self._useful = frozenset(self._reachable() & self._coreachable())
        return self._useful

    def is_empty(self) -> bool:
        return not (self.initial & self.useful_states())

    # -- structural transformations -----------------------------------------------

    def _renumbered(self, keep: Iterable[int]) -> "Fa":
        keep = sorted(keep)
        index = {s: k for k, s in enumerate(keep)}
        delta = []
        for s in keep:
            row = {}
            for letter, dsts in self.delta[s].items():
                kept = frozenset(index[d] for d in dsts if d in index)
                if kept:
                    row[letter] = kept
            delta.append(row)
        if not delta:
            return Fa.empty(self.alphabet)
        return Fa(self.alphabet, delta, (index[s] for s in self.initial if s in index),
                  (index[s] for s in self.final if s in index))

    def trim(self) -> "Fa":
        """Drop states that are unreachable or cannot reach a final state."""
        useful = self.useful_states()
        if len(useful) == self.num_states:
            return self
        return self._renumbered(useful)

    def remove_epsilon(self) -> "Fa":
        if not self.has_epsilon():
            return self
        delta = []
        final = set()
        for s in range(self.num_states):
            cl = self.closure({s})
            if cl & self.final:
                final.add(s)
            row: Dict[Letter, Set[int]] = {}
            for q in cl:
                for letter, dsts in self.delta[q].items():
                    if letter is not None:
                        row.setdefault(letter, set()).update(dsts)
            delta.append({a: frozenset(d) for a, d in row.items()})
        return Fa(self.alphabet, delta, self.initial, final)

    def is_deterministic(self) -> bool:
        if len(self.initial) != 1 or self.has_epsilon():
            return False
        return all(len(d) == 1 for row in self.delta for d in row.values())

    def determinize(self) -> "Fa":
        """Subset construction over the sorted alphabet; unreachable subsets never appear."""
        if self.is_deterministic():
            return self
        letters = sorted_letters(self.alphabet)
        builder = FaBuilder(self.alphabet)
        start = self.closure(self.initial)
        builder.initial.add(builder.state(start))
        queue = deque([start])
        while queue:
            subset = queue.popleft()
            sid = builder.state(subset)
            if subset & self.final:
                builder.final.add(sid)
            for letter in letters:
                nxt = self.step(subset, letter)
                if not nxt:
                    continue
                if nxt not in builder:
                    queue.append(nxt)
                builder.add(sid, letter, builder.state(nxt))
        return builder.build()

    def complete(self) -> "Fa":
        """Add a sink so that every state has a move on every letter (deterministic input)."""
        missing = any(len(row) < len(self.alphabet) for row in self.delta) or not self.delta
        if not missing:
            return self
        sink = len(self.delta)
        everything = frozenset({sink})
        delta = []
        for row in self.delta:
            filled = dict(row)
            for letter in self.alphabet:
                if letter not in filled:
                    filled[letter] = everything
            delta.append(filled)
        delta.append({letter: everything for letter in self.alphabet})
        initial = self.initial or {sink}
        return Fa(self.alphabet, delta, initial, self.final)

    def minimize(self) -> "Fa":
        """Moore partition refinement on a complete DFA."""
        dfa = self.determinize().complete()
        letters = sorted_letters(dfa.alphabet)
        succ = [[next(iter(dfa.delta[s][a])) for a in letters] for s in range(dfa.num_states)]
        block = [1 if s in dfa.final else 0 for s in range(dfa.num_states)]
        count = len(set(block))
        while True:
            signatures: Dict[tuple, int] = {}
            refined = []
            for s in range(dfa.num_states):
                sig = (block[s],) + tuple(block[t] for t in succ[s])
                refined.append(signatures.setdefault(sig, len(signatures)))
            block = refined
            if len(signatures) == count:
                break
            count = len(signatures)
        delta: List[Dict[Letter, FrozenSet[int]]] = [dict() for _ in range(count)]
        final = set()
        for s in range(dfa.num_states):
            b = block[s]
            if s in dfa.final:
                final.add(b)
            if not delta[b]:
                delta[b] = {a: frozenset({block[succ[s][k]]}) for k, a in enumerate(letters)}
        initial = {block[s] for s in dfa.initial}
        return Fa(dfa.alphabet, delta, initial, final)

    def canonical(self) -> "Fa":
        """Renumber a DFA in breadth-first order over the sorted alphabet."""
        letters = sorted_letters(self.alphabet)
        order: Dict[int, int] = {}
        queue = deque(sorted(self.initial))
        for s in queue:
            order.setdefault(s, len(order))
        while queue:
            s = queue.popleft()
            for letter in letters:
                for t in sorted(self.delta[s].get(letter, ())):
                    if t not in order:
                        order[t] = len(order)
                        queue.append(t)
        delta: List[Dict] = [dict() for _ in order]
        for s, k in order.items():
            delta[k] = {a: frozenset(order[t] for t in d) for a, d in self.delta[s].items() if a is not None}
        return Fa(self.alphabet, delta, (order[s] for s in self.initial),
                  (order[s] for s in self.final if s in order))

    def normalize(self) -> "Fa":
        """Deterministic, complete, minimal and canonically numbered."""
        if self._normalized:
            return self
        result = self.minimize().canonical()
        result._normalized = True
        return result

    def with_alphabet(self, alphabet: Iterable[Letter]) -> "Fa":
        """Same transitions over another alphabet; moves on dropped letters disappear."""
        alphabet = frozenset(alphabet)
        if alphabet == self.alphabet:
            return self
        if alphabet >= self.alphabet:
            return Fa(alphabet, self.delta, self.initial, self.final)
        delta = [{a: d for a, d in row.items() if a is None or a in alphabet} for row in self.delta]
        return Fa(alphabet, delta, self.initial, self.final)

    def add_epsilon_parallel(self, letters: Iterable[Letter]) -> "Fa":
        """Allow every move on one of ``letters`` to be skipped."""
        letters = frozenset(letters)
        delta = []
        for row in self.delta:
            new_row = dict(row)
            skipped = set(row.get(None, ()))
            for letter in letters:
                skipped.update(row.get(letter, ()))
            if skipped:
                new_row[None] = frozenset(skipped)
            delta.append(new_row)
        return Fa(self.alphabet, delta, self.initial, self.final)

    # -- language operations ------------------------------------------------------

    def _check_same_alphabet(self, other: "Fa") -> None:
        if self.alphabet != other.alphabet:
            extra = sorted_letters(self.alphabet ^ other.alphabet)[:3]
            shown = ", ".join(format_letter(a) for a in extra)
            raise AlphabetMismatchError(f"automata alphabets differ (e.g. {shown})")

    def intersect(self, other: "Fa") -> "Fa":
        self._check_same_alphabet(other)
        left = self.trim()
        right = other.trim()
        builder = FaBuilder(self.alphabet)
        queue = deque()
        for p, q in product(sorted(left.initial), sorted(right.initial)):
            builder.initial.add(builder.state((p, q)))
            queue.append((p, q))
        while queue:
            p, q = key = queue.popleft()
            sid = builder.state(key)
            if p in left.final and q in right.final:
                builder.final.add(sid)
            moves = []
            for letter, dsts in left.delta[p].items():
                if letter is None:
                    moves.extend(((p2, q), None) for p2 in dsts)
                    continue
                for q2 in right.delta[q].get(letter, ()):
                    moves.extend(((p2, q2), letter) for p2 in dsts)
            for q2 in right.delta[q].get(None, ()):
                moves.append(((p, q2), None))
            for nxt, letter in moves:
                if nxt not in builder:
                    queue.append(nxt)
                builder.add(sid, letter, builder.state(nxt))
        return builder.build().trim()

    def union(self, other: "Fa") -> "Fa":
        self._check_same_alphabet(other)
        shift = self.num_states
        delta = list(self.delta)
        for row in other.delta:
            delta.append({a: frozenset(d + shift for d in dsts) for a, dsts in row.items()})
        initial = set(self.initial) | {s + shift for s in other.initial}
        final = set(self.final) | {s + shift for s in other.final}
        return Fa(self.alphabet, delta, initial, final)

    def concat(self, other: "Fa") -> "Fa":
        """Concatenation; the result alphabet is the union of both alphabets."""
        shift = self.num_states
        starts = frozenset(s + shift for s in other.initial)
        delta = []
        for s, row in enumerate(self.delta):
            new_row = dict(row)
            if s in self.final:
                new_row[None] = frozenset(row.get(None, frozenset()) | starts)
            delta.append(new_row)
        for row in other.delta:
            delta.append({a: frozenset(d + shift for d in dsts) for a, dsts in row.items()})
        final = {s + shift for s in other.final}
        return Fa(self.alphabet | other.alphabet, delta, self.initial, final)

    def star(self) -> "Fa":
        hub = self.num_states
        delta = []
        for s, row in enumerate(self.delta):
            new_row = dict(row)
            if s in self.final:
                new_row[None] = frozenset(row.get(None, frozenset()) | {hub})
            delta.append(new_row)
        delta.append({None: frozenset(self.initial)} if self.initial else {})
        return Fa(self.alphabet, delta, {hub}, {hub})

    def complement(self) -> "Fa":
        dfa = self.normalize()
        final = set(range(dfa.num_states)) - dfa.final
        return Fa(dfa.alphabet, dfa.delta, dfa.initial, final)

    def included(self, other: "Fa") -> bool:
        """``L(self) <= L(other)``, by searching the product with other's complement."""
        self._check_same_alphabet(other)
        left = self.trim().remove_epsilon()
        right = other.normalize()
        (q0,) = right.initial
        seen = {(p, q0) for p in left.initial}
        queue = deque(seen)
        while queue:
            p, q = queue.popleft()
            if p in left.final and q not in right.final:
                return False
            for letter, dsts in left.delta[p].items():
                (q2,) = right.delta[q][letter]
                for p2 in dsts:
                    if (p2, q2) not in seen:
                        seen.add((p2, q2))
                        queue.append((p2, q2))
        return True

    def equivalent(self, other: "Fa") -> bool:
        return self.included(other) and other.included(self)

    # -- words ----------------------------------------------------------------------

    def pick_word(self) -> Optional[Tuple[Letter, ...]]:
        """The shortest word, ties broken by the fixed letter order; None when empty."""
        fa = self.remove_epsilon().trim()
        if fa.is_empty():
            return None
        letters = sorted_letters(fa.alphabet)
        parent: Dict[int, Tuple[Optional[int], Optional[Letter]]] = {}
        queue = deque()
        for s in sorted(fa.initial):
            parent[s] = (None, None)
            queue.append(s)
        hit = next((s for s in queue if s in fa.final), None)
        while hit is None and queue:
            s = queue.popleft()
            for letter in letters:
                for t in sorted(fa.delta[s].get(letter, ())):
                    if t in parent:
                        continue
                    parent[t] = (s, letter)
                    queue.append(t)
                    if hit is None and t in fa.final:
                        hit = t
                if hit is not None:
                    break
        word = []
        s = hit
        while parent[s][0] is not None:
            s, letter = parent[s]
            word.append(letter)
        return tuple(reversed(word))

    def iter_words(self, max_len: int) -> Iterator[Tuple[Letter, ...]]:
        """Every accepted word of length at most ``max_len``, in shortlex order."""
        fa = self.trim()
        if fa.is_empty():
            return
        letters = sorted_letters(fa.alphabet)
        level = [((), fa.closure(fa.initial))]
        for length in range(max_len + 1):
            nxt = []
            for word, states in level:
                if states & fa.final:
                    yield word
                if length == max_len:
                    continue
                for letter in letters:
                    succ = fa.step(states, letter)
                    if succ:
                        nxt.append((word + (letter,), succ))
            level = nxt

    # -- export -----------------------------------------------------------------------

    def to_dot(self, name: str = "fa") -> str:
        """DOT text over the useful states, numbered in breadth-first order."""
        fa = self.trim()
        letters = sorted(fa.alphabet | {None}, key=lambda a: (0,) if a is None else (1,) + letter_key(a))
        order: Dict[int, int] = {}
        queue = deque(sorted(fa.initial))
        for s in queue:
            order.setdefault(s, len(order))
        while queue:
            s = queue.popleft()
            for letter in letters:
                for t in sorted(fa.delta[s].get(letter, ())):
                    if t not in order:
                        order[t] = len(order)
                        queue.append(t)
        lines = [f"digraph {name} {{", "  rankdir=LR;", "  node [shape=circle];"]
        for s, k in sorted(order.items(), key=lambda item: item[1]):
            shape = "doublecircle" if s in fa.final else "circle"
            lines.append(f"  q{k} [shape={shape}];")
        for s in fa.initial:
            lines.append(f"  start{order[s]} [shape=point];")
            lines.append(f"  start{order[s]} -> q{order[s]};")
        for s, k in sorted(order.items(), key=lambda item: item[1]):
            for letter in letters:
                for t in sorted(fa.delta[s].get(letter, ()), key=lambda d: order[d]):
                    label = "ε" if letter is None else format_letter(letter)
                    lines.append(f'  q{k} -> q{order[t]} [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:
        return f"Fa(states={self.num_states}, transitions={self.num_transitions}, letters={len(self.alphabet)})"
