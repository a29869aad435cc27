"""
Tests for finite-alphabet register transducers.
"""
import pytest

from wordeq_rmc.automata import Fa
from wordeq_rmc.frt import (AllOf, Equal, Frt, FrtRule, In, IsKind, Lit, Negate, Reg, conjoin, format_guard,
                            identity_frt)
from wordeq_rmc.symbols import PAD, SymKind, const, pair_letters, var

a, x, y = const("a"), var("x"), var("y")
SYMBOLS = [a, x, y]
LETTERS = pair_letters(SYMBOLS)


def blank_guessed_top() -> Frt:
    """Replaces the top track by a pad wherever it holds the guessed variable."""
    hit = Equal(In(0), Reg("r"))
    rules = [
        FrtRule("q", "q", hit, (Lit(PAD), In(1))),
        FrtRule("q", "q", Negate(hit), (In(0), In(1))),
    ]
    return Frt(["r"], rules, "q", ["q"], guessed={"r": frozenset({SymKind.VAR})})


def lang(*words) -> Fa:
    return Fa.from_words(words, LETTERS)


class TestFrtImage:
    """Test lazy images against the explicit transducer."""

    def test_identity(self):
        """Test the identity FRT copies its input."""
        source = lang(((x, a), (y, y)))
        assert identity_frt().image(source).equivalent(source)

    def test_guessed_register(self):
        """Test one image word per guessed register value."""
        image = blank_guessed_top().image(lang(((x, a), (y, y))))
        assert set(image.iter_words(2)) == {((PAD, a), (y, y)), ((x, a), (PAD, y))}

    def test_pin(self):
        """Test pinning a register keeps only that choice."""
        pinned = blank_guessed_top().pin({"r": y}, tag="y")
        assert pinned.tag == "y"
        image = pinned.image(lang(((x, a), (y, y))))
        assert set(image.iter_words(2)) == {((x, a), (PAD, y))}

    def test_matches_expansion(self):
        """Test the lazy image equals the image under the expanded transducer."""
        frt = blank_guessed_top()
        source = lang(((x, a), (y, y)), ((y, x),), ((a, a), (x, x)))
        expanded = frt.expand(SYMBOLS)
        assert frt.image(source).equivalent(expanded.image(source, LETTERS))

    def test_preimage(self):
        """Test preimages restricted to a language."""
        frt = blank_guessed_top()
        target = lang(((PAD, a), (y, y)))
        restrict = lang(((x, a), (y, y)), ((y, a), (y, y)))
        pre = frt.preimage(target, restrict)
        assert set(pre.iter_words(2)) == {((x, a), (y, y))}

    def test_passthrough(self):
        """Test the passthrough letter copies the rest after a final state."""
        marker = (0,)
        letters = LETTERS | {marker, (1,)}
        source = Fa.from_words([((x, a), marker, (1,))], letters)
        image = blank_guessed_top().pin({"r": x}).image(source, passthrough=marker)
        assert set(image.iter_words(3)) == {((PAD, a), marker, (1,))}


class TestFrtConstruction:
    """Test FRT construction and rendering."""

    def test_unknown_register(self):
        """Test guessed registers must be declared."""
        with pytest.raises(ValueError):
            Frt(["r"], [], "q", ["q"], guessed={"s": frozenset({SymKind.VAR})})

    def test_initial_valuations(self):
        """Test guessed registers range over symbols of their kinds."""
        vals = blank_guessed_top().initial_valuations(SYMBOLS)
        assert vals == [(x,), (y,)]

    def test_init_guard(self):
        """Test the initial guard filters valuations."""
        frt = Frt(["r"], [], "q", ["q"], guessed={"r": frozenset({SymKind.VAR})},
                  init_guard=Negate(Equal(Reg("r"), Lit(x))))
        assert frt.initial_valuations(SYMBOLS) == [(y,)]

    def test_conjoin_flattens(self):
        """Test nested conjunctions are flattened."""
        g = IsKind(In(0), frozenset({SymKind.VAR}))
        h = Equal(In(1), Reg("r"))
        assert conjoin(AllOf((g,)), h) == AllOf((g, h))
        assert conjoin(g) == g

    def test_format_guard(self):
        """Test guard rendering."""
        assert format_guard(Negate(Equal(In(0), Reg("r")))) == "in.top≠r"
        assert format_guard(AllOf(())) == "true"

    def test_to_dot(self):
        """Test DOT export of the control graph."""
        dot = blank_guessed_top().to_dot("blank")
        assert dot.startswith("digraph blank {")
        assert "⋄/in.bot" in dot
