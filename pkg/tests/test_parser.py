"""Tokenizer, parser and printer for bracket expressions."""
import pytest
from hypothesis import given, settings, strategies as st

from pbracket import ParseError
from pbracket.dsl import parse, to_text, tokenize
from pbracket.dsl.nodes import (Bracket, Complement, Expect, Intersect, Name, Num, ObsName, Omega, OmegaT,
                                Product, Sum, Union_, Var)

# every expression form the grammar admits, in assorted spellings
CORPUS = [
    "P(even|Omega)",
    "P(even|odd)",
    "P(Omega|Omega)",
    "P(~even|Omega)",
    "P(~~even|low)",
    "P(even & low|Omega)",
    "P(even ∩ low|high)",
    "P(even + low|Omega)",
    "P(even ∪ low|Ω)",
    "P(even |u low|Omega)",
    "P(even |u(low)|Omega)",
    "P(even |u ~low|Omega)",
    "P(A + B & C|Omega)",
    "P((A + B) & C|Omega)",
    "P(A & (B + C)|D)",
    "P(A + (B + C)|Omega)",
    "P((A + B) + C|Omega)",
    "P(A & (B & C)|Omega)",
    "P(~(A + B)|~C)",
    "P(R|Omega_3)",
    "P(R|Ω_0.5)",
    "P(R + S|Omega_10)",
    "P(R|Omega_1e-3)",
    "P(Omega|X|Omega)",
    "P(Omega|X|Y|Omega)",
    "P(Omega|N|Omega_3)",
    "P(Omega|u|Omega)",
    "P(u|Omega)",
    "P(A|u)",
    "P(upper|inner)",
    "E[X]",
    "E[X*Y]",
    "E[X+Y]",
    "E[X*Y+Z]",
    "E[X*(Y+Z)]",
    "E[(X+Y)*(X+Y)]",
    "E[2*X+1]",
    "E[X+(Y+Z)]",
    "E[X*(Y*Z)]",
    "E[.5*X+2e-3]",
    "E[X] | even",
    "E[X]|even & ~low",
    "E[T] | past1",
    "Var[X]",
    "Var[X*X+c]",
    "  P( even |\n Omega )  ",
]


class TestExamples:
    def test_simple_bracket(self):
        assert parse("P(even|Omega)") == Bracket(Name("even"), (), Omega())

    def test_expectation_of_product(self):
        assert parse("E[X*Y]") == Expect(Product(ObsName("X"), ObsName("Y")), None)

    def test_unterminated_bracket(self):
        with pytest.raises(ParseError) as err:
            parse("P(even|")
        assert (err.value.line, err.value.column) == (1, 8)
        assert "end of input" in str(err.value)
        assert "name" in err.value.expected and "'Omega'" in err.value.expected

    def test_timed_ket(self):
        assert parse("P(R|Omega_3)") == Bracket(Name("R"), (), OmegaT(3.0))

    def test_mids(self):
        assert parse("P(Omega|X|Y|Omega_2)") == Bracket(Omega(), ("X", "Y"), OmegaT(2.0))

    def test_conditional_expectation(self):
        assert parse("E[X] | even & low") == Expect(ObsName("X"), Intersect(Name("even"), Name("low")))

    def test_variance(self):
        assert parse("Var[X+1]") == Var(Sum(ObsName("X"), Num(1.0)))


class TestPrecedence:
    def test_intersection_binds_tighter(self):
        assert parse("P(A + B & C|Omega)").lhs == Union_(Name("A"), Intersect(Name("B"), Name("C")))

    def test_union_is_left_associative(self):
        assert parse("P(A + B + C|Omega)").lhs == Union_(Union_(Name("A"), Name("B")), Name("C"))

    def test_complement_binds_tightest(self):
        assert parse("P(~A & B|Omega)").lhs == Intersect(Complement(Name("A")), Name("B"))

    def test_product_binds_tighter_than_sum(self):
        assert parse("E[X+Y*Z]").obs == Sum(ObsName("X"), Product(ObsName("Y"), ObsName("Z")))

    def test_parentheses_leave_no_node(self):
        assert parse("P(((A))|Omega)") == parse("P(A|Omega)")

    @pytest.mark.parametrize("text", ["∪", "+", "|u "])
    def test_union_spellings(self, text):
        assert parse(f"P(A {text}B|Omega)").lhs == Union_(Name("A"), Name("B"))

    @pytest.mark.parametrize("text", ["∩", "&"])
    def test_intersection_spellings(self, text):
        assert parse(f"P(A {text} B|Omega)").lhs == Intersect(Name("A"), Name("B"))

    def test_bar_u_without_space_is_a_name(self):
        assert parse("P(A|upper)") == Bracket(Name("A"), (), Name("upper"))

    def test_omega_prefixed_name(self):
        assert parse("P(Omegas|Omega)").lhs == Name("Omegas")


class TestErrors:
    @pytest.mark.parametrize("src,line,column", [
        ("", 1, 1),
        ("Q(A|B)", 1, 1),
        ("P(A)", 1, 4),
        ("P(A|B", 1, 6),
        ("P(A|B))", 1, 7),
        ("P(A|B) extra", 1, 8),
        ("E[]", 1, 3),
        ("E[X]]", 1, 5),
        ("Var[X] | A", 1, 8),
        ("P(A #B)", 1, 5),
        ("P(A|\n  B &)", 2, 6),
        ("P(Omega_2|A)", 1, 3),
        ("P(A|X|B)", 1, 3),
        ("P(Omega|~X|Omega)", 1, 9),
        ("E[1e400]", 1, 3),
        ("P(A|Omega_1e999)", 1, 5),
    ])
    def test_position(self, src, line, column):
        with pytest.raises(ParseError) as err:
            parse(src)
        assert (err.value.line, err.value.column) == (line, column)
        assert f"line {line}, column {column}" in str(err.value)

    def test_expected_set_after_event(self):
        with pytest.raises(ParseError) as err:
            parse("P(even")
        assert err.value.expected == {"'&'", "'+'", "'|'"}

    def test_bad_character(self):
        with pytest.raises(ParseError, match="unexpected character '#'"):
            tokenize("P(A#B)")


class TestTokenizer:
    def test_kinds(self):
        kinds = [t.kind for t in tokenize("P(~A ∪ B|Omega_2)")]
        assert kinds == ["NAME", "LPAREN", "NOT", "NAME", "UNION", "NAME", "BAR", "OMEGA_T", "RPAREN", "EOF"]

    def test_positions_across_lines(self):
        toks = tokenize("E[X]\n |  A")
        assert [(t.text, t.line, t.column) for t in toks[-3:]] == [("|", 2, 2), ("A", 2, 5), ("", 2, 6)]


class TestRoundTrip:
    @pytest.mark.parametrize("src", CORPUS)
    def test_corpus(self, src):
        tree = parse(src)
        assert parse(to_text(tree)) == tree

    @pytest.mark.parametrize("src", CORPUS)
    def test_printing_is_stable(self, src):
        text = to_text(parse(src))
        assert to_text(parse(text)) == text


# ---------------------------------------------------------------- generated trees

_RESERVED = {"P", "E", "Var", "Omega"}
names = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,6}", fullmatch=True).filter(
    lambda s: s not in _RESERVED and not s.startswith("Omega_"))
numbers = st.one_of(st.integers(0, 10 ** 6).map(float),
                    st.floats(0, 1e12, allow_nan=False, allow_infinity=False))

events = st.recursive(
    names.map(Name),
    lambda inner: st.one_of(
        st.builds(Union_, inner, inner),
        st.builds(Intersect, inner, inner),
        st.builds(Complement, inner)),
    max_leaves=8)

observables = st.recursive(
    st.one_of(names.map(ObsName), numbers.map(Num)),
    lambda inner: st.one_of(st.builds(Sum, inner, inner), st.builds(Product, inner, inner)),
    max_leaves=8)

omega_rhs = st.one_of(st.just(Omega()), numbers.map(OmegaT))

queries = st.one_of(
    st.builds(lambda a, b: Bracket(a, (), b), st.one_of(events, st.just(Omega())), st.one_of(events, omega_rhs)),
    st.builds(lambda m, r: Bracket(Omega(), tuple(m), r), st.lists(names, min_size=1, max_size=3), omega_rhs),
    st.builds(Expect, observables, st.one_of(st.none(), events)),
    st.builds(Var, observables),
)


@settings(max_examples=400)
@given(queries)
def test_generated_trees_round_trip(tree):
    assert parse(to_text(tree)) == tree
