import pytest
from hypothesis import given, settings, strategies

from models.errors import ChrParseError, ProgramError
from models.program import TRUE, ConstraintAtom, Program, Rule
from models.term import Compound, IntLit, Variable, make_list
from services.lang import (
    logical_reading,
    parse_goal,
    parse_program,
    parse_term,
    program_text,
    rule_reading,
    scalar_goal,
    scalar_program,
    term_text,
    validate_hybrid,
)

X, Y = Variable("X"), Variable("Y")


def test_simplification_rule_defaults():
    program = parse_program("r @ a, a <=> true.")
    (rule,) = program.rules
    assert rule.name == "r"
    assert rule.priority == 3
    assert rule.kept == ()
    assert rule.removed == (ConstraintAtom("a"), ConstraintAtom("a"))
    assert rule.guard == (TRUE,)
    assert rule.body == (TRUE,)


def test_propagation_rule_with_arithmetic():
    (rule,) = parse_program("succ @ q(X) ==> q(X + 1).").rules
    assert rule.is_propagation
    assert rule.priority == 4
    assert rule.body == (ConstraintAtom("q", (Compound("+", (X, IntLit(1))),)),)


def test_simpagation_guard_and_priority():
    (rule,) = parse_program("s @ 2 :: k(X) \\ r(Y) <=> X < Y | t(Y).").rules
    assert rule.priority == 2
    assert rule.kept == (ConstraintAtom("k", (X,)),)
    assert rule.removed == (ConstraintAtom("r", (Y,)),)
    assert rule.guard == (ConstraintAtom("<", (X, Y)),)


def test_default_names_follow_rule_order():
    program = parse_program("a <=> true.\nb ==> c.\n")
    assert [rule.name for rule in program.rules] == ["rule_1", "rule_2"]


def test_directives():
    program = parse_program(":- persistent ~/2.\n:- linear f/2.\n")
    assert program.persistent_symbols == frozenset({("~", 2)})
    assert program.linear_symbols == frozenset({("f", 2)})
    with pytest.raises(ProgramError):
        parse_program(":- persistent p/0.\n:- linear p/0.\n")


@pytest.mark.parametrize(
    "text",
    [
        "x @ <=> true.",
        "a <=> .",
        "k \\ r ==> s.",
        "r @ a <=> true.\nr @ b <=> true.",
        "r @ X = 1 <=> true.",
        "r @ a <=> b | true.",
        "r @ a <=> nonvar(X).",
        "r @ a <=> true",
    ],
)
def test_rejected_programs(text):
    with pytest.raises(ChrParseError):
        parse_program(text)


def test_parse_error_position():
    with pytest.raises(ChrParseError) as info:
        parse_program("ok @ a <=> true.\nbad @ b <=> ) .")
    assert info.value.line == 2


def test_hybrid_mode_rejects_reserved_symbols():
    with pytest.raises(ProgramError):
        parse_program("r @ f(X) <=> true.", hybrid=True)
    parse_program("r @ f(X, Y) <=> true.")


def test_goal_and_terms():
    assert parse_goal("") == ()
    assert parse_goal("a, q(1).") == (ConstraintAtom("a"), ConstraintAtom("q", (IntLit(1),)))
    assert parse_term("[1, 2 | T]") == make_list([IntLit(1), IntLit(2)], Variable("T"))
    first, second = parse_goal("p(_), p(_)")
    assert first.args[0] != second.args[0]


def test_term_text_keeps_grouping():
    assert term_text(parse_term("X - (Y - 1)")) == "X - (Y - 1)"
    assert term_text(parse_term("X - Y - 1")) == "X - Y - 1"
    assert term_text(parse_term("f((a, b), [X | T])")) == "f((a, b), [X | T])"
    assert term_text(parse_term("X = (Y = Z)")) == "X = (Y = Z)"


RULE_TEXT = strategies.sampled_from(
    [
        "p(X) <=> q(X)",
        "p(X), q(Y) ==> X < Y | r(X, Y)",
        "k(X) \\ p(X) <=> X = 1 | true",
        "p([X | T]) <=> q(T), r((X, T), [a, b])",
        "q(X) ==> q(X + 1)",
        "p(X) \\ q(Y) <=> X = Y - 1 | false",
        "p((X, Y, Z)) <=> q(X ~ Y), r(Z)",
    ]
)


@settings(max_examples=50)
@given(
    rules=strategies.lists(strategies.tuples(RULE_TEXT, strategies.sampled_from(["", "1 :: ", "7 :: "])), max_size=5),
    persistent=strategies.sets(strategies.sampled_from(["k/1", "~/2", "s/0"])),
)
def test_program_text_round_trip(rules, persistent):
    lines = [f":- persistent {symbol}." for symbol in sorted(persistent)]
    lines += [f"r{index} @ {priority}{text}." for index, (text, priority) in enumerate(rules)]
    program = parse_program("\n".join(lines))
    assert parse_program(program_text(program)) == program


def test_program_text_of_built_rules_round_trips():
    rule = Rule("r", 5, (ConstraintAtom("k", (X,)),), (ConstraintAtom("p", (Y,)),), (TRUE,), (ConstraintAtom("q", (X, Y)),))
    program = Program((rule,), frozenset({("k", 1)}))
    assert parse_program(program_text(program)) == program


def test_logical_reading():
    program = parse_program("pair @ a, a <=> true.\nprop @ k ==> b.\nlocal @ p(X) <=> q(X, Z).")
    lines = logical_reading(program).splitlines()
    assert lines[0] == "pair: ∀((a ∧ a) ↔ true)"
    assert lines[1] == "prop: ∀(k → b)"
    assert lines[2] == "local: ∀(p(X) ↔ ∃Z(q(X, Z)))"
    assert lines[-1].startswith("state")


def test_logical_reading_of_guarded_simpagation():
    (rule,) = parse_program("s @ k(X) \\ p(X, Y) <=> Y < X | r(Y).").rules
    assert rule_reading(rule) == "∀((k(X) ∧ Y < X) → (p(X, Y) ↔ (Y < X ∧ r(Y))))"


def test_validate_hybrid(bisim_text):
    assert validate_hybrid(parse_program(bisim_text)) == []
    assert validate_hybrid(parse_program("")) == []
    violations = validate_hybrid(parse_program("r @ k \\ s <=> t."))
    assert [v.rule for v in violations] == ["r"]
    violations = validate_hybrid(parse_program(":- persistent s/0.\nr @ s <=> t."))
    assert "persistent" in violations[0].reason


def test_scalar_program():
    program = parse_program("p @ k ==> b, X = 1.")
    scaled = scalar_program(program, 3)
    (rule,) = scaled.rules
    assert rule.name == "p_x3"
    assert rule.body == (ConstraintAtom("b"),) * 3 + (ConstraintAtom("=", (Variable("X"), IntLit(1))),)
    assert scalar_program(program, 1).rules[0].body == program.rules[0].body
    with pytest.raises(ProgramError):
        scalar_program(parse_program("r @ a <=> b."), 2)
    with pytest.raises(ProgramError):
        scalar_program(program, 0)


def test_scalar_goal_repeats_user_constraints_only():
    goal = parse_goal("a, X = 1")
    assert scalar_goal(goal, 2) == (ConstraintAtom("a"), ConstraintAtom("a"), goal[1])
