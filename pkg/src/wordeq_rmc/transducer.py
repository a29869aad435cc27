"""
Two-tape finite transducers: rational relations between track words.
"""
import logging
from collections import deque
from itertools import product
from typing import Dict, FrozenSet, Hashable, Iterable, Iterator, List, Optional, Sequence, Set, Tuple, Union

try:
    from .automata import Fa, FaBuilder
    from .errors import AlphabetMismatchError
    from .symbols import Letter, format_letter, letter_key
except ImportError:
    from automata import Fa, FaBuilder
    from errors import AlphabetMismatchError
    from symbols import Letter, format_letter, letter_key

logger = logging.getLogger(__name__)

Move = Tuple[Optional[Letter], Optional[Letter], int]


class TransducerBuilder:
    """Incremental construction of a transducer with hashable state keys."""

    def __init__(self, alphabet: Iterable[Letter] = (), tag=None):
        self.alphabet = set(alphabet)
        self.tag = tag
        self._ids: Dict[Hashable, int] = {}
        self._moves: List[Set[Move]] = []
        self.initial: Set[int] = set()
        self.final: Set[int] = set()

    def __contains__(self, key: Hashable) -> bool:
        return key in self._ids

    def state(self, key: Hashable = None) -> int:
        if key is not None and key in self._ids:
            return self._ids[key]
        sid = len(self._moves)
        self._moves.append(set())
        if key is not None:
            self._ids[key] = sid
        return sid

    def add(self, src: int, inp: Optional[Letter], out: Optional[Letter], dst: int) -> None:
        for letter in (inp, out):
            if letter is not None:
                self.alphabet.add(letter)
        self._moves[src].add((inp, out, dst))

    def build(self) -> "Transducer":
        return Transducer(self.alphabet, self._moves, self.initial, self.final, tag=self.tag)


class Transducer:
    """A 2-tape transducer; ``None`` on either tape is the empty word."""

    __slots__ = ("alphabet", "moves", "initial", "final", "tag", "_by_input", "_by_output")

    def __init__(self, alphabet: Iterable[Letter], moves: Sequence[Iterable[Move]], initial: Iterable[int],
                 final: Iterable[int], tag=None):
        self.alphabet: FrozenSet[Letter] = frozenset(alphabet)
        self.moves: Tuple[Tuple[Move, ...], ...] = tuple(
            tuple(sorted(row, key=_move_key)) for row in moves)
        self.initial: FrozenSet[int] = frozenset(initial)
        self.final: FrozenSet[int] = frozenset(final)
        self.tag = tag
        self._by_input = None
        self._by_output = None

    @property
    def num_states(self) -> int:
        return len(self.moves)

    @property
    def num_transitions(self) -> int:
        return sum(len(row) for row in self.moves)

    def retag(self, tag) -> "Transducer":
        return Transducer(self.alphabet, self.moves, self.initial, self.final, tag=tag)

    def input_letters(self) -> FrozenSet[Letter]:
        return frozenset(m[0] for row in self.moves for m in row if m[0] is not None)

    def output_letters(self) -> FrozenSet[Letter]:
        return frozenset(m[1] for row in self.moves for m in row if m[1] is not None)

    def is_length_preserving(self) -> bool:
        return all(m[0] is not None and m[1] is not None for row in self.moves for m in row)

    def _index(self, side: int) -> List[Dict[Optional[Letter], List[Tuple[Optional[Letter], int]]]]:
        index = []
        for row in self.moves:
            by_letter: Dict[Optional[Letter], List[Tuple[Optional[Letter], int]]] = {}
            for move in row:
                by_letter.setdefault(move[side], []).append((move[1 - side], move[2]))
            index.append(by_letter)
        return index

    @property
    def by_input(self):
        if self._by_input is None:
            self._by_input = self._index(0)
        return self._by_input

    @property
    def by_output(self):
        if self._by_output is None:
            self._by_output = self._index(1)
        return self._by_output

    # -- applying the relation --------------------------------------------------------

    def _apply(self, lang: Fa, side: int, alphabet: Optional[Iterable[Letter]]) -> Fa:
        index = self.by_input if side == 0 else self.by_output
        source = lang.remove_epsilon().trim()
        produced = self.output_letters() if side == 0 else self.input_letters()
        letters = frozenset(alphabet) if alphabet is not None else source.alphabet | produced
        builder = FaBuilder(letters)
        queue = deque()
        for key in product(sorted(self.initial), sorted(source.initial)):
            builder.initial.add(builder.state(key))
            queue.append(key)
        while queue:
            key = queue.popleft()
            t, q = key
            sid = builder.state(key)
            if t in self.final and q in source.final:
                builder.final.add(sid)
            moves = [((t2, q), out) for out, t2 in index[t].get(None, ())]
            for letter, dsts in source.delta[q].items():
                for out, t2 in index[t].get(letter, ()):
                    moves.extend(((t2, q2), out) for q2 in dsts)
            for nxt, out in moves:
                if out is not None and out not in letters:
                    raise AlphabetMismatchError(f"produced letter {format_letter(out)} outside the target alphabet")
                if nxt not in builder:
                    queue.append(nxt)
                builder.add(sid, out, builder.state(nxt))
        return builder.build().trim()

    def image(self, lang: Fa, alphabet: Optional[Iterable[Letter]] = None) -> Fa:
        """``{v | (u, v) in R, u in L}``."""
        return self._apply(lang, 0, alphabet)

    def preimage(self, lang: Fa, alphabet: Optional[Iterable[Letter]] = None) -> Fa:
        """``{u | (u, v) in R, v in L}``."""
        return self._apply(lang, 1, alphabet)

    def preimage_into(self, target: Union[Fa, Sequence[Letter]], restrict: Fa) -> Fa:
        """Preimage of a word (or language) intersected with ``restrict``."""
        if not isinstance(target, Fa):
            target = Fa.word(target, restrict.alphabet | frozenset(target))
        return self.preimage(target, restrict.alphabet).intersect(restrict)

    def accepts_pair(self, u: Sequence[Letter], v: Sequence[Letter]) -> bool:
        """Membership of ``(u, v)`` in the relation."""
        start = {(t, 0, 0) for t in self.initial}
        seen = set(start)
        queue = deque(start)
        while queue:
            t, i, j = queue.popleft()
            if t in self.final and i == len(u) and j == len(v):
                return True
            for inp, out, t2 in self.moves[t]:
                i2, j2 = i, j
                if inp is not None:
                    if i >= len(u) or u[i] != inp:
                        continue
                    i2 += 1
                if out is not None:
                    if j >= len(v) or v[j] != out:
                        continue
                    j2 += 1
                if (t2, i2, j2) not in seen:
                    seen.add((t2, i2, j2))
                    queue.append((t2, i2, j2))
        return False

    # -- closure operations -------------------------------------------------------------

    @classmethod
    def identity(cls, lang: Fa, tag=None) -> "Transducer":
        """The identity relation on ``L(lang)``."""
        moves = [{(a, a, d) if a is not None else (None, None, d) for a, dsts in row.items() for d in dsts}
                 for row in lang.delta]
        return cls(lang.alphabet, moves, lang.initial, lang.final, tag=tag)

    @classmethod
    def letter_map(cls, pairs: Iterable[Tuple[Optional[Letter], Optional[Letter]]], tag=None) -> "Transducer":
        """One-state relation ``{(a, b), ...}*``."""
        moves = [{(a, b, 0) for a, b in pairs}]
        letters = {x for pair in moves[0] for x in pair[:2] if x is not None}
        return cls(letters, moves, {0}, {0}, tag=tag)

    def inverse(self) -> "Transducer":
        moves = [{(out, inp, d) for inp, out, d in row} for row in self.moves]
        return Transducer(self.alphabet, moves, self.initial, self.final, tag=self.tag)

    def _shifted(self, shift: int) -> List[Set[Move]]:
        return [{(i, o, d + shift) for i, o, d in row} for row in self.moves]

    def union(self, other: "Transducer") -> "Transducer":
        shift = self.num_states
        moves = [set(row) for row in self.moves] + other._shifted(shift)
        return Transducer(self.alphabet | other.alphabet, moves,
                          set(self.initial) | {s + shift for s in other.initial},
                          set(self.final) | {s + shift for s in other.final})

    def concat_rel(self, other: "Transducer") -> "Transducer":
        """Pairwise concatenation ``{(u1 u2, v1 v2)}``."""
        shift = self.num_states
        moves = [set(row) for row in self.moves] + other._shifted(shift)
        for f in self.final:
            for s in other.initial:
                moves[f].add((None, None, s + shift))
        return Transducer(self.alphabet | other.alphabet, moves, self.initial,
                          {s + shift for s in other.final}, tag=self.tag)

    def star(self) -> "Transducer":
        hub = self.num_states
        moves = [set(row) for row in self.moves] + [{(None, None, s) for s in self.initial}]
        for f in self.final:
            moves[f].add((None, None, hub))
        return Transducer(self.alphabet, moves, {hub}, {hub}, tag=self.tag)

    def compose(self, inner: "Transducer") -> "Transducer":
        """``self o inner``: first ``inner``, then ``self``."""
        builder = TransducerBuilder(self.alphabet | inner.alphabet, tag=self.tag)
        queue = deque()
        for key in product(sorted(self.initial), sorted(inner.initial)):
            builder.initial.add(builder.state(key))
            queue.append(key)
        while queue:
            key = queue.popleft()
            o, i = key
            sid = builder.state(key)
            if o in self.final and i in inner.final:
                builder.final.add(sid)
            edges = []
            for inp, mid, i2 in inner.moves[i]:
                if mid is None:
                    edges.append(((o, i2), inp, None))
                    continue
                for out, o2 in self.by_input[o].get(mid, ()):
                    edges.append(((o2, i2), inp, out))
            for out, o2 in self.by_input[o].get(None, ()):
                edges.append(((o2, i), None, out))
            for nxt, inp, out in edges:
                if nxt not in builder:
                    queue.append(nxt)
                builder.add(sid, inp, out, builder.state(nxt))
        return builder.build()

    def domain(self) -> Fa:
        return self._project(0)

    def range(self) -> Fa:
        return self._project(1)

    def _project(self, side: int) -> Fa:
        delta = []
        for row in self.moves:
            projected: Dict[Optional[Letter], Set[int]] = {}
            for move in row:
                projected.setdefault(move[side], set()).add(move[2])
            delta.append({a: frozenset(d) for a, d in projected.items()})
        return Fa(self.alphabet, delta, self.initial, self.final)

    def iter_pairs(self, max_len: int) -> Iterator[Tuple[Tuple[Letter, ...], Tuple[Letter, ...]]]:
        """All related pairs whose tapes are both at most ``max_len`` long (no duplicates)."""
        seen = set()
        frontier = {(t, (), ()) for t in self.initial}
        visited = set(frontier)
        while frontier:
            nxt = set()
            for t, u, v in frontier:
                if t in self.final and (u, v) not in seen:
                    seen.add((u, v))
                    yield u, v
                for inp, out, t2 in self.moves[t]:
                    u2 = u + (inp,) if inp is not None else u
                    v2 = v + (out,) if out is not None else v
                    if len(u2) > max_len or len(v2) > max_len:
                        continue
                    item = (t2, u2, v2)
                    if item not in visited:
                        visited.add(item)
                        nxt.add(item)
            frontier = nxt

    def to_dot(self, name: str = "transducer") -> str:
        lines = [f"digraph {name} {{", "  rankdir=LR;"]
        for s in range(self.num_states):
            shape = "doublecircle" if s in self.final else "circle"
            lines.append(f"  q{s} [shape={shape}];")
        for s in sorted(self.initial):
            lines.append(f"  start{s} [shape=point];")
            lines.append(f"  start{s} -> q{s};")
        for s, row in enumerate(self.moves):
            for inp, out, d in row:
                left = "ε" if inp is None else format_letter(inp)
                right = "ε" if out is None else format_letter(out)
                lines.append(f'  q{s} -> q{d} [label="{left} : {right}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def __repr__(self) -> str:
        return f"Transducer(states={self.num_states}, transitions={self.num_transitions}, tag={self.tag})"


def _move_key(move: Move) -> tuple:
    inp, out, dst = move
    return ((0,) if inp is None else (1,) + letter_key(inp),
            (0,) if out is None else (1,) + letter_key(out),
            dst)
