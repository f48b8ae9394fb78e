import pytest
from hypothesis import given, settings, strategies

from models.errors import ChrParseError, ProgramError
from services.coind import (
    EMPTY,
    EPS,
    Alt,
    Char,
    Concat,
    Plus,
    Star,
    Verdict,
    automata_equivalent,
    automaton_to_constraints,
    bisim_check,
    derivative,
    destruct,
    load_automaton,
    matches,
    nullable,
    oracle_lang_equal,
    parse_regex,
    regex_equal,
    regex_to_term,
    term_to_regex,
    translated_destructor_program,
)

a, b = Char("a"), Char("b")

BIG_LEFT = "((b*,a)*,(a,b*))*"
BIG_RIGHT = "[[]*, (a,[a,b]*), ([a,b]*,(a,(a,[a,b]*)))]"


def test_load_automaton(sample_automaton):
    assert sample_automaton.states == ("l1", "l2", "l3", "k1", "k2")
    assert sample_automaton.dest["l1"] == (0, "l2", "l3")
    assert len(automaton_to_constraints(sample_automaton)) == 5
    assert load_automaton("# nothing\n").states == ()


@pytest.mark.parametrize("text", ["x 2 x x", "x 0 x", "x 0 x y", "x 0 x x\nx 1 x x"])
def test_malformed_automata(text):
    with pytest.raises(ChrParseError):
        load_automaton(text)


def test_bisimilar_states(sample_automaton):
    result = bisim_check(sample_automaton, "l1", "k1")
    assert result.verdict is Verdict.EQUAL
    assert not result.derivation.state.builtins.failed


def test_non_bisimilar_states(sample_automaton):
    result = bisim_check(sample_automaton, "l1", "k2")
    assert result.verdict is Verdict.NOT_EQUAL
    assert result.derivation.state.builtins.failed


def test_bisim_agrees_with_product_search(sample_automaton):
    for left in sample_automaton.states:
        for right in sample_automaton.states:
            expected = Verdict.EQUAL if automata_equivalent(sample_automaton, left, right) else Verdict.NOT_EQUAL
            assert bisim_check(sample_automaton, left, right).verdict is expected, (left, right)


def test_bisim_unknown_state(sample_automaton):
    with pytest.raises(ProgramError):
        bisim_check(sample_automaton, "l1", "zz")


def test_parse_regex():
    assert parse_regex("a+") == Plus(a)
    assert parse_regex("(a,a*)") == Concat(a, Star(a))
    assert parse_regex("[]") == EMPTY
    assert parse_regex("1") == EPS
    assert parse_regex("[a, b*]") == Alt((a, Star(b)))
    assert parse_regex("a,b,a") == Concat(a, Concat(b, a))
    with pytest.raises(ChrParseError):
        parse_regex("(a,")


def test_regex_term_encoding():
    for text in ("a+", BIG_LEFT, BIG_RIGHT, "[1, []]"):
        e = parse_regex(text)
        assert term_to_regex(regex_to_term(e)) == e


@pytest.mark.parametrize(
    "left, right, verdict",
    [
        ("a+", "(a,a*)", Verdict.EQUAL),
        ("a+", "a*", Verdict.NOT_EQUAL),
        ("[a, b]", "[b, a]", Verdict.EQUAL),
        ("a*", "[1, (a, a*)]", Verdict.EQUAL),
        ("(a, b)", "(b, a)", Verdict.NOT_EQUAL),
        ("[]", "[]*", Verdict.NOT_EQUAL),
        (BIG_LEFT, BIG_RIGHT, Verdict.EQUAL),
    ],
)
def test_regex_equal(left, right, verdict):
    assert regex_equal(parse_regex(left), parse_regex(right)).verdict is verdict


def test_destructor_translation_is_cached():
    assert translated_destructor_program() is translated_destructor_program()
    assert translated_destructor_program().control.wrap == "f_h"


def test_oracle():
    assert oracle_lang_equal(parse_regex("a+"), parse_regex("(a,a*)")).equal
    result = oracle_lang_equal(parse_regex("a+"), parse_regex("a*"))
    assert not result.equal
    assert result.witness == ""
    assert matches(parse_regex(BIG_RIGHT), "abaa")
    assert not matches(parse_regex("(a,b)"), "ba")
    assert nullable(parse_regex("[a, 1]"))


def gen_regex(depth=2):
    leaves = strategies.sampled_from([a, b, EPS, EMPTY])
    if depth == 0:
        return leaves
    sub = gen_regex(depth - 1)
    return strategies.one_of(
        leaves,
        strategies.builds(Concat, sub, sub),
        strategies.builds(Star, sub),
        strategies.builds(Plus, sub),
        strategies.builds(lambda items: Alt(tuple(items)), strategies.lists(sub, min_size=1, max_size=3)),
    )


@settings(max_examples=60, deadline=None)
@given(e=gen_regex(3))
def test_destruct_matches_brzozowski_derivatives(e):
    bit, d_a, d_b = destruct(e)
    assert bit == int(nullable(e))
    assert oracle_lang_equal(d_a, derivative(e, "a"), max_len=6).equal
    assert oracle_lang_equal(d_b, derivative(e, "b"), max_len=6).equal


@settings(max_examples=200, deadline=None)
@given(left=gen_regex(4), right=gen_regex(4))
def test_regex_equal_agrees_with_oracle(left, right):
    verdict = regex_equal(left, right).verdict
    assert verdict is not Verdict.LIMIT
    assert (verdict is Verdict.EQUAL) == oracle_lang_equal(left, right, max_len=12).equal


@settings(max_examples=60, deadline=None)
@given(left=gen_regex(3), right=gen_regex(3))
def test_regex_equal_is_symmetric(left, right):
    assert regex_equal(left, right).verdict is regex_equal(right, left).verdict
