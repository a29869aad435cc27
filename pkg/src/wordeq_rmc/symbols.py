"""
Alphabet atoms and track letters shared by every automaton in the solver.

A letter is one of three shapes:
  * a pair ``(top, bottom)`` of symbols, the 2-track encoding of an equation,
  * a bare symbol, used only for the length separator,
  * a tuple of bits, one per length-tracked variable.
"""
from enum import Enum
from itertools import product
from typing import Iterable, List, NamedTuple, Sequence, Tuple, Union


class SymKind(str, Enum):
    """Kinds of alphabet atoms."""
    CONST = "const"
    VAR = "var"
    PAD = "pad"
    DELI = "deli"
    LENSEP = "lensep"


_KIND_ORDER = {
    SymKind.CONST: 0,
    SymKind.VAR: 1,
    SymKind.PAD: 2,
    SymKind.DELI: 3,
    SymKind.LENSEP: 4,
}

RESERVED_KINDS = frozenset({SymKind.PAD, SymKind.DELI, SymKind.LENSEP})
WORD_KINDS = frozenset({SymKind.CONST, SymKind.VAR})


class Sym(NamedTuple):
    """A single alphabet atom: a constant, a variable or a reserved marker."""
    kind: SymKind
    name: str

    def __str__(self) -> str:
        return self.name

    @property
    def is_var(self) -> bool:
        return self.kind == SymKind.VAR

    @property
    def is_const(self) -> bool:
        return self.kind == SymKind.CONST


PAD = Sym(SymKind.PAD, "⋄")
DELI = Sym(SymKind.DELI, "#")
LENSEP = Sym(SymKind.LENSEP, "ℓ")

Pair = Tuple[Sym, Sym]
Bits = Tuple[int, ...]
Letter = Union[Pair, Sym, Bits]
Word = Tuple[Letter, ...]

PAD_PAIR: Pair = (PAD, PAD)
DELI_PAIR: Pair = (DELI, DELI)


def const(char: str) -> Sym:
    return Sym(SymKind.CONST, char)


def var(name: str) -> Sym:
    return Sym(SymKind.VAR, name)


def sym_key(sym: Sym) -> Tuple[int, str]:
    """Total order on symbols: constants, variables, then pad < delimiter < separator."""
    return (_KIND_ORDER[sym.kind], sym.name)


def is_pair(letter: Letter) -> bool:
    return (not isinstance(letter, Sym)) and len(letter) == 2 and isinstance(letter[0], Sym)


def is_bits(letter: Letter) -> bool:
    return not isinstance(letter, Sym) and not is_pair(letter)


def letter_key(letter: Letter) -> tuple:
    """Sort key over all letter shapes; pairs < bare symbols < bit tuples."""
    if isinstance(letter, Sym):
        return (1, sym_key(letter))
    if is_pair(letter):
        return (0, sym_key(letter[0]), sym_key(letter[1]))
    return (2, tuple(letter))


def sorted_letters(letters: Iterable[Letter]) -> List[Letter]:
    return sorted(letters, key=letter_key)


def sorted_syms(syms: Iterable[Sym]) -> List[Sym]:
    return sorted(syms, key=sym_key)


def pair_letters(symbols: Iterable[Sym], delimited: bool = False) -> frozenset:
    """All 2-track letters over the given word symbols plus the pad.

    With ``delimited`` the delimiter pair ``(#/#)`` is added; the delimiter never
    pairs with any other symbol.
    """
    syms = {s for s in symbols if s.kind in WORD_KINDS}
    syms.add(PAD)
    letters = set(product(syms, repeat=2))
    if delimited:
        letters.add(DELI_PAIR)
    return frozenset(letters)


def bit_letters(width: int) -> frozenset:
    return frozenset(product((0, 1), repeat=width))


def letter_symbols(letters: Iterable[Letter]) -> frozenset:
    """Every symbol appearing as a component of a pair letter."""
    syms = set()
    for letter in letters:
        if is_pair(letter):
            syms.update(letter)
    return frozenset(syms)


def format_letter(letter: Letter) -> str:
    if isinstance(letter, Sym):
        return letter.name
    if is_pair(letter):
        return f"({letter[0].name}/{letter[1].name})"
    return "(" + ",".join(str(b) for b in letter) + ")"


def format_word(word: Sequence[Letter]) -> str:
    if not word:
        return "ε"
    return "".join(format_letter(letter) for letter in word)


def format_term(term: Sequence[Sym]) -> str:
    if not term:
        return "ε"
    return " ".join(s.name for s in term)
