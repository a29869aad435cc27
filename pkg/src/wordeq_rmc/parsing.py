"""
Input formats: the native line format and an SMT-LIB 2 string fragment.

Native format::

    ; comment
    alphabet: a b
    vars: x y
    x a y = y x
    !(x = a) | (y != x)
    len: |x| + 2|y| <= 5

Constraint lines are conjoined. Word terms are whitespace-separated symbols; ``ε`` (or
``eps``) is the empty term.
"""
import io
import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

try:
    from .errors import InputError, ParseError, UndeclaredSymbolError, UnsupportedFeatureError
    from .models import (FALSE, TRUE, And, BoolConst, EqLit, LenAtom, LenLit, Not, Or, Problem, WordEquation,
                         conj, disj)
    from .symbols import Sym, SymKind
except ImportError:
    from errors import InputError, ParseError, UndeclaredSymbolError, UnsupportedFeatureError
    from models import (FALSE, TRUE, And, BoolConst, EqLit, LenAtom, LenLit, Not, Or, Problem, WordEquation,
                        conj, disj)
    from symbols import Sym, SymKind

logger = logging.getLogger(__name__)

EMPTY_WORDS = {"ε", "eps"}
SMTLIB_SUFFIXES = {".smt2", ".smt"}
SMTLIB_COMMAND = re.compile(r"\(\s*(set-|declare-|define-|assert\b|check-sat|get-|push\b|pop\b|reset\b|exit\b)")


# -- length relations ---------------------------------------------------------------------------

def length_relation(coefficients: Dict[str, int], constant: int, op: str):
    """Formula for ``sum(coef * |x|) + constant  op  0``."""
    coefficients = {n: c for n, c in coefficients.items() if c != 0}
    if not coefficients:
        value = {"<=": constant <= 0, "<": constant < 0, ">=": constant >= 0, ">": constant > 0,
                 "=": constant == 0, "!=": constant != 0}[op]
        return BoolConst(value=value)
    negated = {n: -c for n, c in coefficients.items()}
    if op == "<=":
        return LenLit(atom=LenAtom(coefficients=coefficients, bound=-constant))
    if op == "<":
        return LenLit(atom=LenAtom(coefficients=coefficients, bound=-constant - 1))
    if op == ">=":
        return LenLit(atom=LenAtom(coefficients=negated, bound=constant))
    if op == ">":
        return LenLit(atom=LenAtom(coefficients=negated, bound=constant - 1))
    if op == "=":
        return And(args=(length_relation(coefficients, constant, "<="), length_relation(coefficients, constant, ">=")))
    if op == "!=":
        return Or(args=(length_relation(coefficients, constant, "<"), length_relation(coefficients, constant, ">")))
    raise ValueError(f"unknown relation {op!r}")


# -- native format ----------------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(!=|\(|\)|&|\||!|=|[^\s()&|!=]+)")
_LEN_TOKEN = re.compile(r"\s*(?:(\d+)\s*\*?\s*\|\s*([^|\s]+)\s*\||\|\s*([^|\s]+)\s*\||(\d+)|(<=|>=|!=|==|<|>|=)|([+-]))")


class _Token:
    __slots__ = ("text", "line", "column")

    def __init__(self, text: str, line: int, column: int):
        self.text = text
        self.line = line
        self.column = column


class _NativeParser:
    """Recursive descent over one constraint line."""

    def __init__(self, constants: Sequence[str], variables: Sequence[str]):
        self.constants = set(constants)
        self.variables = set(variables)

    def tokenize(self, text: str, line: int) -> List[_Token]:
        tokens = []
        pos = 0
        stripped = text.rstrip()
        while pos < len(stripped):
            m = _TOKEN.match(stripped, pos)
            if not m:
                raise ParseError(f"unexpected character {stripped[pos]!r}", line, pos + 1)
            tokens.append(_Token(m.group(1), line, m.start(1) + 1))
            pos = m.end()
        return tokens

    def parse(self, text: str, line: int):
        self.tokens = self.tokenize(text, line)
        self.pos = 0
        self.line = line
        result = self.parse_or()
        if self.pos < len(self.tokens):
            tok = self.tokens[self.pos]
            raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.column)
        return result

    def peek(self) -> Optional[str]:
        return self.tokens[self.pos].text if self.pos < len(self.tokens) else None

    def expect(self, text: str) -> None:
        if self.peek() != text:
            column = self.tokens[self.pos].column if self.pos < len(self.tokens) else None
            raise ParseError(f"expected {text!r}", self.line, column)
        self.pos += 1

    def parse_or(self):
        args = [self.parse_and()]
        while self.peek() == "|":
            self.pos += 1
            args.append(self.parse_and())
        return disj(args)

    def parse_and(self):
        args = [self.parse_unary()]
        while self.peek() == "&":
            self.pos += 1
            args.append(self.parse_unary())
        return conj(args)

    def parse_unary(self):
        if self.peek() == "!":
            self.pos += 1
            return Not(arg=self.parse_unary())
        if self.peek() == "(":
            self.pos += 1
            inner = self.parse_or()
            self.expect(")")
            return inner
        return self.parse_atom()

    def parse_term(self) -> Tuple[Sym, ...]:
        syms = []
        while self.peek() is not None and self.peek() not in {"=", "!=", "(", ")", "&", "|", "!"}:
            tok = self.tokens[self.pos]
            self.pos += 1
            if tok.text in EMPTY_WORDS:
                continue
            if tok.text in self.constants:
                syms.append(Sym(SymKind.CONST, tok.text))
            elif tok.text in self.variables:
                syms.append(Sym(SymKind.VAR, tok.text))
            else:
                raise UndeclaredSymbolError(f"undeclared symbol {tok.text!r}", tok.line, tok.column)
        return tuple(syms)

    def parse_atom(self):
        lhs = self.parse_term()
        op = self.peek()
        if op not in {"=", "!="}:
            column = self.tokens[self.pos].column if self.pos < len(self.tokens) else None
            raise ParseError("expected '=' or '!='", self.line, column)
        self.pos += 1
        rhs = self.parse_term()
        return EqLit(equation=WordEquation(lhs=lhs, rhs=rhs), positive=op == "=")


def _parse_length(text: str, variables: Sequence[str], line: int, offset: int):
    sides: List[Tuple[Dict[str, int], int]] = [({}, 0)]
    op = None
    sign = 1
    pos = 0
    body = text.rstrip()
    while pos < len(body):
        m = _LEN_TOKEN.match(body, pos)
        if not m:
            raise ParseError(f"unexpected character {body[pos]!r} in length constraint", line, offset + pos + 1)
        coef, scaled, plain, number, relation, sign_tok = m.groups()
        coefs, constant = sides[-1]
        if scaled or plain:
            name = scaled or plain
            if name not in variables:
                raise UndeclaredSymbolError(f"undeclared variable {name!r}", line, offset + m.start() + 1)
            coefs[name] = coefs.get(name, 0) + sign * (int(coef) if coef else 1)
            sign = 1
        elif number:
            sides[-1] = (coefs, constant + sign * int(number))
            sign = 1
        elif relation:
            if op is not None:
                raise ParseError("more than one relation in length constraint", line, offset + m.start() + 1)
            op = "=" if relation == "==" else relation
            sides.append(({}, 0))
        else:
            sign = -sign if sign_tok == "-" else sign
        pos = m.end()
    if op is None:
        raise ParseError("length constraint needs a relation", line, offset + 1)
    (left, lconst), (right, rconst) = sides
    merged = dict(left)
    for name, c in right.items():
        merged[name] = merged.get(name, 0) - c
    return length_relation(merged, lconst - rconst, op)


def parse_native(text: str) -> Problem:
    """Parse the native constraint format."""
    constants: List[str] = []
    variables: List[str] = []
    pending: List[Tuple[int, str]] = []
    lengths: List[Tuple[int, str, int]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(";", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        head, sep, rest = stripped.partition(":")
        head = head.strip().lower()
        if head == "alphabet" and sep:
            for ch in rest.split():
                if len(ch) != 1:
                    raise ParseError(f"constant {ch!r} is not a single character", number, line.find(ch) + 1)
                constants.append(ch)
        elif head in ("vars", "variables") and sep:
            variables.extend(rest.split())
        elif head == "len" and sep:
            lengths.append((number, rest, line.find(":") + 1))
        else:
            pending.append((number, line))
    clash = set(constants) & set(variables)
    if clash:
        raise ParseError(f"symbols declared as both constant and variable: {sorted(clash)}")
    parser = _NativeParser(constants, variables)
    parts = [parser.parse(line, number) for number, line in pending]
    parts.extend(_parse_length(body, variables, number, offset) for number, body, offset in lengths)
    formula = conj(parts) if parts else TRUE
    logger.debug(f"Parsed {len(parts)} constraint lines over {len(constants)} constants and {len(variables)} variables")
    return Problem(alphabet=tuple(constants), variables=tuple(variables), formula=formula)


# -- SMT-LIB ------------------------------------------------------------------------------------------

class _SmtTranslator:
    """Turns pysmt terms into constraint formulas."""

    def __init__(self, op):
        self.op = op
        self.constants = set()
        self.variables = set()

    def unsupported(self, node):
        name = self.op.op_to_str(node.node_type())
        logger.error(f"Unsupported SMT-LIB construct {name}")
        return UnsupportedFeatureError(name)

    def word(self, node) -> Tuple[Sym, ...]:
        op = self.op
        kind = node.node_type()
        if kind == op.SYMBOL:
            if not node.symbol_type().is_string_type():
                raise self.unsupported(node)
            self.variables.add(node.symbol_name())
            return (Sym(SymKind.VAR, node.symbol_name()),)
        if kind == op.STR_CONSTANT:
            value = node.constant_value()
            self.constants.update(value)
            return tuple(Sym(SymKind.CONST, ch) for ch in value)
        if kind == op.STR_CONCAT:
            return tuple(s for arg in node.args() for s in self.word(arg))
        raise self.unsupported(node)

    def linear(self, node) -> Tuple[Dict[str, int], int]:
        op = self.op
        kind = node.node_type()
        if kind == op.INT_CONSTANT:
            return {}, int(node.constant_value())
        if kind == op.STR_LENGTH:
            (arg,) = node.args()
            coefs: Dict[str, int] = {}
            constant = 0
            for sym in self.word(arg):
                if sym.is_var:
                    coefs[sym.name] = coefs.get(sym.name, 0) + 1
                else:
                    constant += 1
            return coefs, constant
        if kind in (op.PLUS, op.MINUS):
            parts = [self.linear(arg) for arg in node.args()]
            coefs, constant = dict(parts[0][0]), parts[0][1]
            factor = -1 if kind == op.MINUS else 1
            for other, c in parts[1:]:
                for name, v in other.items():
                    coefs[name] = coefs.get(name, 0) + factor * v
                constant += factor * c
            return coefs, constant
        if kind == op.TIMES:
            coefs, constant = {}, 1
            for arg in node.args():
                other, factor = self.linear(arg)
                if coefs and other:
                    raise self.unsupported(node)
                merged = {n: v * factor for n, v in coefs.items()}
                for n, v in other.items():
                    merged[n] = merged.get(n, 0) + v * constant
                coefs, constant = merged, constant * factor
            return coefs, constant
        raise self.unsupported(node)

    def formula(self, node):
        op = self.op
        kind = node.node_type()
        if kind == op.BOOL_CONSTANT:
            return TRUE if node.constant_value() else FALSE
        if kind == op.AND:
            return conj([self.formula(a) for a in node.args()]) if node.args() else TRUE
        if kind == op.OR:
            return disj([self.formula(a) for a in node.args()]) if node.args() else FALSE
        if kind == op.NOT:
            return Not(arg=self.formula(node.arg(0)))
        if kind == op.IMPLIES:
            left, right = node.args()
            return Or(args=(Not(arg=self.formula(left)), self.formula(right)))
        if kind == op.IFF:
            left, right = (self.formula(a) for a in node.args())
            return Or(args=(And(args=(left, right)), And(args=(Not(arg=left), Not(arg=right)))))
        if kind == op.EQUALS:
            left, right = node.args()
            if left.get_type().is_string_type():
                return EqLit(equation=WordEquation(lhs=self.word(left), rhs=self.word(right)))
            return self.relation(left, right, "=")
        if kind in (op.LE, op.LT):
            left, right = node.args()
            return self.relation(left, right, "<=" if kind == op.LE else "<")
        raise self.unsupported(node)

    def relation(self, left, right, relation: str):
        lcoefs, lconst = self.linear(left)
        rcoefs, rconst = self.linear(right)
        merged = dict(lcoefs)
        for name, v in rcoefs.items():
            merged[name] = merged.get(name, 0) - v
        return length_relation(merged, lconst - rconst, relation)


def parse_smtlib(text: str) -> Problem:
    """Parse word equations and length constraints from SMT-LIB 2 text."""
    from pysmt import operators
    from pysmt.exceptions import PysmtException
    from pysmt.smtlib.parser import SmtLibParser

    parser = SmtLibParser()
    try:
        script = parser.get_script(io.StringIO(text))
    except PysmtException as e:
        logger.error(f"SMT-LIB parse failure: {e}")
        raise ParseError(str(e))
    except (SyntaxError, ValueError, KeyError) as e:
        raise ParseError(str(e))
    translator = _SmtTranslator(operators)
    asserts = [cmd.args[0] for cmd in script.commands if cmd.name == "assert"]
    formula = conj([translator.formula(a) for a in asserts]) if asserts else TRUE
    declared = set()
    for cmd in script.commands:
        if cmd.name in ("declare-fun", "declare-const"):
            sym = cmd.args[0]
            if sym.symbol_type().is_string_type():
                declared.add(sym.symbol_name())
    variables = tuple(sorted(declared | translator.variables))
    return Problem(alphabet=tuple(sorted(translator.constants)), variables=variables, formula=formula)


def is_smtlib(path: Path, text: str) -> bool:
    if path.suffix.lower() in SMTLIB_SUFFIXES:
        return True
    for line in text.splitlines():
        stripped = line.strip()
        if stripped and not stripped.startswith(";"):
            return SMTLIB_COMMAND.match(stripped) is not None
    return False


def parse_file(path) -> Problem:
    """Parse a constraint file, picking the format from its suffix or first token."""
    path = Path(path)
    try:
        text = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as e:
        logger.error(f"{path} is not valid UTF-8")
        raise InputError(f"{path}: invalid UTF-8 byte at offset {e.start}") from None
    if is_smtlib(path, text):
        return parse_smtlib(text)
    return parse_native(text)
