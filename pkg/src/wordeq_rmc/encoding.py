"""
Translation between equation systems and 2-track configuration languages.

An equation ``lhs = rhs`` becomes the pair word of both sides, padded with ``⋄`` to equal
length and followed by ``(⋄/⋄)*``; its longest common prefix is trimmed first. Systems are
joined with ``(#/#)``. With length constraints the word continues with ``ℓ`` and LSBF bit
tuples, one bit per variable.
"""
import logging
from enum import Enum
from itertools import zip_longest
from typing import FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

try:
    from .automata import Fa, FaBuilder
    from .errors import DecodeError, MalformedCnfError
    from .models import EquationSystem, WordEquation
    from .symbols import (DELI_PAIR, LENSEP, PAD, PAD_PAIR, Letter, Sym, SymKind, bit_letters, format_word,
                          is_bits, is_pair, pair_letters)
except ImportError:
    from automata import Fa, FaBuilder
    from errors import DecodeError, MalformedCnfError
    from models import EquationSystem, WordEquation
    from symbols import (DELI_PAIR, LENSEP, PAD, PAD_PAIR, Letter, Sym, SymKind, bit_letters, format_word,
                         is_bits, is_pair, pair_letters)

logger = logging.getLogger(__name__)


class DestKind(str, Enum):
    """Shapes of destination sets."""
    SINGLE = "single"
    SYSTEM = "system"
    LENGTH = "with-length"


def problem_alphabet(symbols: Iterable[Sym], delimited: bool = False, width: Optional[int] = None) -> FrozenSet[Letter]:
    """Every letter a configuration over ``symbols`` can use.

    ``width`` adds the length separator and the bit tuples for that many variables.
    """
    letters = set(pair_letters(symbols, delimited=delimited))
    if width is not None:
        letters.add(LENSEP)
        letters |= bit_letters(width)
    return frozenset(letters)


def _default_alphabet(equations: Iterable[WordEquation], delimited: bool) -> FrozenSet[Letter]:
    syms = set()
    for eq in equations:
        syms.update(eq.lhs)
        syms.update(eq.rhs)
    return pair_letters(syms, delimited=delimited)


def pair_word(e: WordEquation) -> Tuple[Letter, ...]:
    """Shortest track word of ``e`` after trimming."""
    e = e.trimmed()
    return tuple((top or PAD, bot or PAD) for top, bot in zip_longest(e.lhs, e.rhs))


def eq_encode(e: WordEquation, alphabet: Optional[Iterable[Letter]] = None) -> Fa:
    """All pad extensions of the trimmed track word of ``e``."""
    alphabet = frozenset(alphabet) if alphabet is not None else _default_alphabet([e], False)
    return Fa.word(pair_word(e), alphabet).concat(Fa.letters_star([PAD_PAIR], alphabet))


def _joined(parts: Sequence[Fa], alphabet: FrozenSet[Letter]) -> Fa:
    result = parts[0]
    sep = Fa.word([DELI_PAIR], alphabet)
    for part in parts[1:]:
        result = result.concat(sep).concat(part)
    return result


def sys_encode(s: EquationSystem, alphabet: Optional[Iterable[Letter]] = None) -> Fa:
    """Encodings of a conjunction, separated by ``(#/#)``."""
    equations = s.equations
    alphabet = frozenset(alphabet) if alphabet is not None else _default_alphabet(equations, True)
    if len(equations) == 1:
        return eq_encode(equations[0], alphabet)
    return _joined([eq_encode(e, alphabet) for e in equations], alphabet)


def cnf_encode(s: EquationSystem, alphabet: Optional[Iterable[Letter]] = None) -> Fa:
    """Like ``sys_encode`` with each clause encoded as the union of its equations."""
    equations = [e for clause in s.clauses for e in clause]
    alphabet = frozenset(alphabet) if alphabet is not None else _default_alphabet(equations, True)
    parts = []
    for k, clause in enumerate(s.clauses):
        if not clause:
            logger.error(f"Clause {k} of the CNF is empty")
            raise MalformedCnfError(f"clause {k} is empty")
        part = eq_encode(clause[0], alphabet)
        for e in clause[1:]:
            part = part.union(eq_encode(e, alphabet))
        parts.append(part)
    if len(parts) == 1:
        return parts[0]
    return _joined(parts, alphabet)


def dest_set(kind: DestKind, alphabet: Iterable[Letter], system: bool = False) -> Fa:
    """Destination configurations: only pads (and delimiters), then any length bits."""
    alphabet = frozenset(alphabet)
    kind = DestKind(kind)
    solved = {PAD_PAIR, DELI_PAIR} if kind == DestKind.SYSTEM or system else {PAD_PAIR}
    dest = Fa.letters_star(solved, alphabet)
    if kind == DestKind.LENGTH:
        bits = [a for a in alphabet if is_bits(a)]
        dest = dest.concat(Fa.word([LENSEP], alphabet)).concat(Fa.letters_star(bits, alphabet))
    return dest


def split_length(word: Sequence[Letter]) -> Tuple[Tuple[Letter, ...], Optional[Tuple[Letter, ...]]]:
    """Split a configuration into its track part and its bit part (None without ``ℓ``)."""
    word = tuple(word)
    if LENSEP in word:
        k = word.index(LENSEP)
        return word[:k], word[k + 1:]
    return word, None


def _strip_track(track: List[Sym], word: Sequence[Letter]) -> Tuple[Sym, ...]:
    k = len(track)
    while k > 0 and track[k - 1] == PAD:
        k -= 1
    if PAD in track[:k]:
        raise DecodeError(f"pad before a symbol in {format_word(word)}")
    return tuple(track[:k])


def decode_config(word: Sequence[Letter]) -> EquationSystem:
    """The conjunction a track word denotes; bits after ``ℓ`` are ignored."""
    tracks, _ = split_length(word)
    segments: List[List[Letter]] = [[]]
    for letter in tracks:
        if not is_pair(letter):
            raise DecodeError(f"unexpected letter in track part of {format_word(word)}")
        if letter == DELI_PAIR:
            segments.append([])
        elif SymKind.DELI in (letter[0].kind, letter[1].kind):
            raise DecodeError(f"delimiter on one track only in {format_word(word)}")
        else:
            segments[-1].append(letter)
    equations = []
    for segment in segments:
        lhs = _strip_track([top for top, _ in segment], word)
        rhs = _strip_track([bot for _, bot in segment], word)
        equations.append(WordEquation(lhs=lhs, rhs=rhs))
    return EquationSystem.conjunction(equations)


def decode_language(fa: Fa, max_len: int) -> Set[EquationSystem]:
    """Decode every member of ``fa`` up to ``max_len`` letters."""
    return {decode_config(w) for w in fa.iter_words(max_len)}


def word_fa(word: Sequence[Letter], alphabet: Iterable[Letter]) -> Fa:
    return Fa.word(tuple(word), alphabet)


def pad_closure(word: Sequence[Letter], alphabet: Iterable[Letter]) -> Fa:
    """``word`` with ``(⋄/⋄)*`` allowed at the end of every equation segment."""
    alphabet = frozenset(alphabet)
    tracks, bits = split_length(word)
    builder = FaBuilder(alphabet)
    current = builder.state()
    builder.initial.add(current)
    for letter in tracks:
        if letter == DELI_PAIR:
            builder.add(current, PAD_PAIR, current)
        nxt = builder.state()
        builder.add(current, letter, nxt)
        current = nxt
    builder.add(current, PAD_PAIR, current)
    if bits is not None:
        for letter in (LENSEP,) + bits:
            nxt = builder.state()
            builder.add(current, letter, nxt)
            current = nxt
    builder.final.add(current)
    return builder.build()
