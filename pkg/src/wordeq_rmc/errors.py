"""
Exception hierarchy for the solver.
"""
from typing import Optional


class WordEqError(Exception):
    """Base class for every error raised by the solver."""


class InputError(WordEqError, ValueError):
    """The user's input cannot be turned into a constraint."""


class ParseError(InputError):
    """Syntax error in a constraint file."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None:
            where = f"line {line}" if column is None else f"line {line}, column {column}"
            message = f"{where}: {message}"
        super().__init__(message)


class UndeclaredSymbolError(ParseError):
    """A word term uses a symbol that is neither a declared constant nor variable."""


class UnsupportedFeatureError(InputError):
    """The input uses an operator outside the supported fragment."""

    def __init__(self, operator: str, detail: str = ""):
        self.operator = operator
        message = f"unsupported operator '{operator}'"
        if detail:
            message += f": {detail}"
        super().__init__(message)


class ModeMismatchError(InputError):
    """The requested solving mode cannot handle the input's occurrence counts."""


class AlphabetMismatchError(WordEqError, ValueError):
    """Two automata (or an automaton and a word) disagree on their alphabet."""


class DecodeError(WordEqError, ValueError):
    """A track word is not a well-formed encoding."""


class MalformedCnfError(WordEqError, ValueError):
    """A CNF system has a shape the encoder cannot handle."""


class CnfCapExceeded(WordEqError):
    """CNF conversion produced more clauses than allowed."""

    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"CNF conversion exceeded the cap of {cap} clauses")


class TagMismatchError(WordEqError, ValueError):
    """Equation and length step transducers were built for different rules."""


class InternalSolverError(WordEqError, RuntimeError):
    """A solver invariant was violated."""


class ExtractionError(InternalSolverError):
    """Backward model extraction failed or produced a model that does not verify."""
