"""
Length constraints as automata over LSBF bit tuples.

One track per variable, in a fixed order; a bit word denotes the valuation whose k-th bit
(least significant first) is the k-th tuple's component. Trailing zero tuples do not change
the valuation.
"""
import logging
from typing import Dict, FrozenSet, Iterable, Mapping, Optional, Sequence, Tuple

try:
    from .automata import Fa, FaBuilder
    from .errors import TagMismatchError
    from .models import And, BoolConst, LenAtom, LenLit, Not, Or
    from .nielsen import RuleKind, RuleTag
    from .symbols import LENSEP, Bits, Letter, bit_letters, sorted_letters
    from .transducer import Transducer, TransducerBuilder
except ImportError:
    from automata import Fa, FaBuilder
    from errors import TagMismatchError
    from models import And, BoolConst, LenAtom, LenLit, Not, Or
    from nielsen import RuleKind, RuleTag
    from symbols import LENSEP, Bits, Letter, bit_letters, sorted_letters
    from transducer import Transducer, TransducerBuilder

logger = logging.getLogger(__name__)


def lsbf_encode(n: int) -> FrozenSet[int]:
    """Bit positions set in ``n``: 42 -> {1, 3, 5}."""
    if n < 0:
        raise ValueError(f"cannot encode negative length {n}")
    return frozenset(k for k in range(n.bit_length()) if n >> k & 1)


def lsbf_decode(positions: Iterable[int]) -> int:
    return sum(1 << k for k in set(positions))


def lsbfp_encode(n: int) -> FrozenSet[int]:
    """Positional variant, counting positions from 1."""
    return frozenset(k + 1 for k in lsbf_encode(n))


def lsbfp_decode(positions: Iterable[int]) -> int:
    return lsbf_decode(k - 1 for k in positions)


def encode_values(values: Mapping[str, int], order: Sequence[str], length: Optional[int] = None) -> Tuple[Bits, ...]:
    """Bit word of a valuation, padded with zero tuples to ``length`` if given."""
    needed = max((values.get(name, 0).bit_length() for name in order), default=0)
    length = needed if length is None else max(length, needed)
    return tuple(tuple(values.get(name, 0) >> k & 1 for name in order) for k in range(length))


def decode_bits(word: Sequence[Bits], order: Sequence[str]) -> Dict[str, int]:
    values = {name: 0 for name in order}
    for k, bits in enumerate(word):
        for name, bit in zip(order, bits):
            values[name] += bit << k
    return values


def atom_to_fa(atom: LenAtom, order: Sequence[str]) -> Fa:
    """Bit words whose valuation satisfies ``atom``.

    States are residual bounds: after reading bits ``b`` at bound ``c`` the rest of the
    valuation must satisfy the same left-hand side with bound ``(c - a.b) // 2``.
    """
    index = {name: k for k, name in enumerate(order)}
    missing = atom.variables() - set(index)
    if missing:
        raise ValueError(f"length atom mentions untracked variables {sorted(missing)}")
    coefs = [(index[name], coef) for name, coef in atom.coefficients]
    letters = sorted_letters(bit_letters(len(order)))
    builder = FaBuilder(letters)
    start = builder.state(atom.bound)
    builder.initial.add(start)
    todo = [atom.bound]
    while todo:
        c = todo.pop()
        sid = builder.state(c)
        if c >= 0:
            builder.final.add(sid)
        for bits in letters:
            s = sum(coef * bits[k] for k, coef in coefs)
            nxt = (c - s) // 2
            if nxt not in builder:
                todo.append(nxt)
            builder.add(sid, bits, builder.state(nxt))
    return builder.build()


def formula_to_fa(formula, order: Sequence[str]) -> Fa:
    """Automaton of a Boolean combination of length atoms."""
    alphabet = bit_letters(len(order))
    if isinstance(formula, LenLit):
        return atom_to_fa(formula.atom, order)
    if isinstance(formula, BoolConst):
        return Fa.universal(alphabet) if formula.value else Fa.empty(alphabet)
    if isinstance(formula, Not):
        return formula_to_fa(formula.arg, order).complement()
    if isinstance(formula, And):
        result = Fa.universal(alphabet)
        for arg in formula.args:
            result = result.intersect(formula_to_fa(arg, order)).normalize()
        return result
    if isinstance(formula, Or):
        result = Fa.empty(alphabet)
        for arg in formula.args:
            result = result.union(formula_to_fa(arg, order))
        return result.normalize()
    raise ValueError(f"not a length formula: {type(formula).__name__}")


def evaluate_length_formula(formula, lengths: Mapping[str, int]) -> bool:
    if isinstance(formula, LenLit):
        return formula.atom.evaluate(lengths)
    if isinstance(formula, BoolConst):
        return formula.value
    if isinstance(formula, Not):
        return not evaluate_length_formula(formula.arg, lengths)
    if isinstance(formula, And):
        return all(evaluate_length_formula(a, lengths) for a in formula.args)
    if isinstance(formula, Or):
        return any(evaluate_length_formula(a, lengths) for a in formula.args)
    raise ValueError(f"not a length formula: {type(formula).__name__}")


def build_len_step(tag: RuleTag, order: Sequence[str]) -> Transducer:
    """The length update of one rule on bit words.

    ``x -> y x`` gives ``x' = x - y`` (needs ``x >= y``), ``x -> a x`` gives ``x' = x - 1``
    and ``x -> ε`` requires ``x = 0``. Other tracks are copied.
    """
    if tag.kind not in (RuleKind.VAR_EPS, RuleKind.VAR_PREPEND):
        raise ValueError(f"no length step for rule {tag}")
    index = {name: k for k, name in enumerate(order)}
    x = index[tag.var.name]
    letters = sorted_letters(bit_letters(len(order)))
    builder = TransducerBuilder(letters, tag=tag)
    if tag.kind == RuleKind.VAR_EPS:
        state = builder.state(0)
        builder.initial.add(state)
        builder.final.add(state)
        for bits in letters:
            if bits[x] == 0:
                builder.add(state, bits, bits, state)
        return builder.build()
    y = index[tag.alpha.name] if tag.alpha.is_var else None
    no_borrow, borrow = builder.state(0), builder.state(1)
    builder.initial.add(borrow if y is None else no_borrow)
    builder.final.add(no_borrow)
    for carry, sid in ((0, no_borrow), (1, borrow)):
        for bits in letters:
            diff = bits[x] - carry - (bits[y] if y is not None else 0)
            out = list(bits)
            out[x] = diff & 1
            builder.add(sid, bits, tuple(out), borrow if diff < 0 else no_borrow)
    return builder.build()


def combine_eq_len(step_eq: Transducer, step_len: Transducer) -> Transducer:
    """``step_eq . (ℓ/ℓ) . step_len`` for one rule."""
    if step_eq.tag != step_len.tag:
        logger.error(f"Cannot combine steps tagged {step_eq.tag} and {step_len.tag}")
        raise TagMismatchError(f"equation step {step_eq.tag} does not match length step {step_len.tag}")
    separator = TransducerBuilder([LENSEP])
    before, after = separator.state(), separator.state()
    separator.initial.add(before)
    separator.final.add(after)
    separator.add(before, LENSEP, LENSEP, after)
    return step_eq.concat_rel(separator.build()).concat_rel(step_len).retag(step_eq.tag)


def bit_alphabet(order: Sequence[str]) -> FrozenSet[Letter]:
    return bit_letters(len(order))
