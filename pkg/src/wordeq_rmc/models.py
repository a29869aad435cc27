"""
Data models for constraints, problems and solver results.
"""
from enum import Enum
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing_extensions import Annotated, Literal

try:
    from .config import Mode
    from .symbols import RESERVED_KINDS, Sym, SymKind, format_term, sym_key
except ImportError:
    from config import Mode
    from symbols import RESERVED_KINDS, Sym, SymKind, format_term, sym_key


WordTerm = Tuple[Sym, ...]


class WordEquation(BaseModel):
    """An equation between two word terms."""
    model_config = ConfigDict(frozen=True)

    lhs: WordTerm = ()
    rhs: WordTerm = ()

    @field_validator("lhs", "rhs")
    @classmethod
    def validate_term(cls, v):
        for sym in v:
            if sym.kind in RESERVED_KINDS:
                raise ValueError(f"reserved symbol {sym.name!r} inside a word term")
        return v

    def variables(self) -> frozenset:
        return frozenset(s for s in self.lhs + self.rhs if s.is_var)

    def constants(self) -> frozenset:
        return frozenset(s for s in self.lhs + self.rhs if s.is_const)

    def occurrences(self, variable: Sym) -> int:
        return self.lhs.count(variable) + self.rhs.count(variable)

    def trimmed(self) -> "WordEquation":
        """Drop the longest common prefix of both sides."""
        k = 0
        while k < len(self.lhs) and k < len(self.rhs) and self.lhs[k] == self.rhs[k]:
            k += 1
        if k == 0:
            return self
        return WordEquation(lhs=self.lhs[k:], rhs=self.rhs[k:])

    def substitute(self, variable: Sym, replacement: Sequence[Sym]) -> "WordEquation":
        def subst(term):
            out = []
            for s in term:
                if s == variable:
                    out.extend(replacement)
                else:
                    out.append(s)
            return tuple(out)
        return WordEquation(lhs=subst(self.lhs), rhs=subst(self.rhs))

    def is_trivial(self) -> bool:
        """True when both sides are syntactically identical."""
        return self.lhs == self.rhs

    def is_empty(self) -> bool:
        return not self.lhs and not self.rhs

    def __str__(self) -> str:
        return f"{format_term(self.lhs)} = {format_term(self.rhs)}"


class EquationSystem(BaseModel):
    """A CNF over word equations; a pure conjunction has only singleton clauses."""
    model_config = ConfigDict(frozen=True)

    clauses: Tuple[Tuple[WordEquation, ...], ...]

    @field_validator("clauses")
    @classmethod
    def validate_clauses(cls, v):
        if not v:
            raise ValueError("an equation system needs at least one clause")
        return v

    @classmethod
    def conjunction(cls, equations: Iterable[WordEquation]) -> "EquationSystem":
        return cls(clauses=tuple((e,) for e in equations))

    @property
    def is_conjunction(self) -> bool:
        return all(len(c) == 1 for c in self.clauses)

    @property
    def equations(self) -> Tuple[WordEquation, ...]:
        """The equations of a pure conjunction."""
        if not self.is_conjunction:
            raise ValueError("system has disjunctive clauses")
        return tuple(c[0] for c in self.clauses)

    def variables(self) -> frozenset:
        found = set()
        for clause in self.clauses:
            for eq in clause:
                found |= eq.variables()
        return frozenset(found)

    def constants(self) -> frozenset:
        found = set()
        for clause in self.clauses:
            for eq in clause:
                found |= eq.constants()
        return frozenset(found)

    def __str__(self) -> str:
        parts = []
        for clause in self.clauses:
            text = " | ".join(str(e) for e in clause)
            parts.append(f"({text})" if len(clause) > 1 else text)
        return " & ".join(parts)


class LenAtom(BaseModel):
    """Linear length constraint ``sum(coef * |var|) <= bound``."""
    model_config = ConfigDict(frozen=True)

    coefficients: Tuple[Tuple[str, int], ...]
    bound: int

    @field_validator("coefficients", mode="before")
    @classmethod
    def normalize_coefficients(cls, v):
        items = v.items() if isinstance(v, Mapping) else v
        merged: Dict[str, int] = {}
        for name, coef in items:
            merged[name] = merged.get(name, 0) + int(coef)
        cleaned = tuple(sorted((n, c) for n, c in merged.items() if c != 0))
        if not cleaned:
            raise ValueError("a length atom needs at least one nonzero coefficient")
        return cleaned

    def variables(self) -> frozenset:
        return frozenset(n for n, _ in self.coefficients)

    def evaluate(self, lengths: Mapping[str, int]) -> bool:
        total = sum(c * lengths.get(n, 0) for n, c in self.coefficients)
        return total <= self.bound

    def negated(self) -> "LenAtom":
        """``not (a.x <= c)`` is ``-a.x <= -c - 1`` over the naturals."""
        return LenAtom(coefficients=tuple((n, -c) for n, c in self.coefficients), bound=-self.bound - 1)

    def __str__(self) -> str:
        terms = []
        for name, coef in self.coefficients:
            sign = "-" if coef < 0 else "+"
            mag = abs(coef)
            body = f"|{name}|" if mag == 1 else f"{mag}|{name}|"
            terms.append((sign, body))
        text = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sign, body in terms[1:]:
            text += f" {sign} {body}"
        return f"{text} <= {self.bound}"


class EqLit(BaseModel):
    """A word equation (positive) or inequation (negative) literal."""
    model_config = ConfigDict(frozen=True)
    kind: Literal["eq"] = "eq"
    equation: WordEquation
    positive: bool = True


class LenLit(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["len"] = "len"
    atom: LenAtom


class BoolConst(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["const"] = "const"
    value: bool


class Not(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["not"] = "not"
    arg: "Formula"


class And(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["and"] = "and"
    args: Tuple["Formula", ...] = ()


class Or(BaseModel):
    model_config = ConfigDict(frozen=True)
    kind: Literal["or"] = "or"
    args: Tuple["Formula", ...] = ()


Formula = Annotated[Union[EqLit, LenLit, BoolConst, Not, And, Or], Field(discriminator="kind")]

Not.model_rebuild()
And.model_rebuild()
Or.model_rebuild()


TRUE = BoolConst(value=True)
FALSE = BoolConst(value=False)


def conj(args: Sequence) -> "Formula":
    args = tuple(args)
    if len(args) == 1:
        return args[0]
    return And(args=args)


def disj(args: Sequence) -> "Formula":
    args = tuple(args)
    if len(args) == 1:
        return args[0]
    return Or(args=args)


def iter_literals(formula) -> Iterable:
    """Yield every EqLit and LenLit in a formula."""
    if isinstance(formula, (EqLit, LenLit)):
        yield formula
    elif isinstance(formula, Not):
        yield from iter_literals(formula.arg)
    elif isinstance(formula, (And, Or)):
        for arg in formula.args:
            yield from iter_literals(arg)


def formula_variables(formula) -> frozenset:
    """Names of all variables in word literals and length atoms."""
    names = set()
    for lit in iter_literals(formula):
        if isinstance(lit, EqLit):
            names.update(s.name for s in lit.equation.variables())
        else:
            names.update(lit.atom.variables())
    return frozenset(names)


class Problem(BaseModel):
    """A parsed constraint together with its declared symbols."""
    alphabet: Tuple[str, ...] = ()
    variables: Tuple[str, ...] = ()
    formula: Formula = TRUE

    @field_validator("alphabet")
    @classmethod
    def validate_alphabet(cls, v):
        for ch in v:
            if len(ch) != 1:
                raise ValueError(f"constants must be single characters, got {ch!r}")
        return tuple(sorted(set(v)))

    def constant_syms(self) -> List[Sym]:
        return [Sym(SymKind.CONST, ch) for ch in self.alphabet]

    def all_variables(self) -> Tuple[str, ...]:
        """Declared variables plus any that only appear in the formula."""
        return tuple(sorted(set(self.variables) | formula_variables(self.formula)))


class Verdict(str, Enum):
    """Solver answers."""
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


class UnknownReason(str, Enum):
    """Why a run ended without a definite answer."""
    BUDGET = "budget"
    CNF_CAP = "cnf-cap"


def smtlib_escape(value: str) -> str:
    """SMT-LIB 2.6 string literal body: ``"`` doubled, ``\\`` and non-printables as ``\\u{..}``."""
    out = []
    for ch in value:
        if ch == '"':
            out.append('""')
        elif ch == "\\" or not ch.isprintable():
            out.append(f"\\u{{{ord(ch):x}}}")
        else:
            out.append(ch)
    return "".join(out)


class SolveResult(BaseModel):
    """Outcome of one solver run."""
    verdict: Verdict
    model: Optional[Dict[str, str]] = None
    reason: Optional[UnknownReason] = None
    mode: Optional[Mode] = None
    iterations: int = Field(0, ge=0)
    peak_states: int = Field(0, ge=0)
    time_ms: float = Field(0.0, ge=0)

    @model_validator(mode="after")
    def check_consistency(self):
        if self.verdict == Verdict.SAT and self.model is None:
            raise ValueError("a sat result needs a model")
        if self.verdict == Verdict.UNKNOWN and self.reason is None:
            raise ValueError("an unknown result needs a reason")
        return self

    def model_lines(self) -> List[str]:
        """Render the model as ``x = "..."`` lines, sorted by variable."""
        if not self.model:
            return []
        return [f'{name} = "{smtlib_escape(value)}"' for name, value in sorted(self.model.items())]


class OracleOutcome(str, Enum):
    SAT = "sat"
    NO_MODEL = "no-model"
    CAP = "cap"


class OracleResult(BaseModel):
    """Result of the bounded brute-force search."""
    outcome: OracleOutcome
    max_len: int
    model: Optional[Dict[str, str]] = None
    nodes: int = 0


def sorted_var_syms(names: Iterable[str]) -> List[Sym]:
    return sorted((Sym(SymKind.VAR, n) for n in names), key=sym_key)
