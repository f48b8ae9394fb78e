import pytest
from hypothesis import given, settings, strategies

from models.errors import InvariantViolation
from models.program import TRUE, ConstraintAtom, Query
from models.state import ConcreteState, DerivationStatus, IdentifiedConstraint, StepKind
from models.term import Atom, IntLit, Variable
from services.engine import (
    applicable_instances,
    apply_step,
    check_state,
    initial_state,
    introduce_step,
    run,
    solve_step,
    trace_text,
)
from services.lang import parse_goal, parse_program, parse_query


def store_of(*atoms):
    return tuple(IdentifiedConstraint(atom, index) for index, atom in enumerate(atoms))


def introduced(goal_text):
    state = initial_state(parse_query(goal_text))
    while state.goal:
        state = introduce_step(state)
    return state


def test_solve_tells_leftmost_builtin():
    state = initial_state(parse_query("X = a, p(X)"))
    after = solve_step(state)
    assert after.goal == (ConstraintAtom("p", (Variable("X"),)),)
    assert after.builtins.resolve(Variable("X")) == Atom("a")
    assert solve_step(after) is None
    assert solve_step(initial_state(parse_query("false"))).builtins.failed


def test_introduce_assigns_identifiers_from_zero():
    state = introduced("a, b")
    assert [item.id for item in state.chr_store] == [0, 1]
    assert state.next_id == 2
    assert introduce_step(initial_state(parse_query("X = 1"))) is None


def test_introduce_folds_ground_arithmetic():
    state = introduce_step(initial_state(parse_query("q(1 + 1)")))
    assert state.chr_store[0].constraint == ConstraintAtom("q", (IntLit(2),))


def test_applicable_instances_in_head_order(cancel_program):
    instances = applicable_instances(introduced("a, a"), cancel_program)
    assert [instance.removed_ids for instance in instances] == [(0, 1), (1, 0)]
    assert applicable_instances(introduced("a"), cancel_program) == []


def test_fired_token_is_not_applicable_again(successor_program):
    state = introduced("q(1)")
    (instance,) = applicable_instances(state, successor_program)
    assert instance.token == ("succ", (0,))
    fired = apply_step(state, successor_program)
    assert fired.goal == (ConstraintAtom("q", (IntLit(2),)),)
    assert fired.chr_store == state.chr_store
    assert ("succ", (0,)) in fired.tokens
    assert applicable_instances(fired, successor_program) == []


def test_apply_removes_simplified_constraints(cancel_program):
    after = apply_step(introduced("a, a"), cancel_program)
    assert after.chr_store == ()
    assert after.goal == (TRUE,)


def test_priorities_choose_the_most_urgent_rule():
    program = parse_program("late @ 5 :: p <=> late.\nearly @ 1 :: p <=> early.")
    result = run(parse_query("p"), program)
    assert [item.constraint.functor for item in result.state.chr_store] == ["early"]


def test_run_success(cancel_program):
    result = run(parse_query("a, a, a"), cancel_program)
    assert result.status is DerivationStatus.SUCCESS
    assert [item.constraint for item in result.state.chr_store] == [ConstraintAtom("a")]


def test_run_failure(cancel_program, successor_program):
    assert run(parse_query("c"), cancel_program).status is DerivationStatus.FAILED
    result = run(parse_query("q(0)"), successor_program)
    assert result.status is DerivationStatus.FAILED
    assert result.steps == 3


def test_run_step_limit(cancel_program):
    result = run(parse_query("b"), cancel_program, step_limit=50)
    assert result.status is DerivationStatus.STEP_LIMIT
    assert result.steps == 50


def test_guard_equation_with_arithmetic_fires():
    program = parse_program("p(X) <=> X = 0 + 1 | ok.")
    result = run(parse_query("p(1)"), program)
    assert result.status is DerivationStatus.SUCCESS
    assert [item.constraint for item in result.state.chr_store] == [ConstraintAtom("ok")]
    result = run(parse_query("p(2)"), program)
    assert [item.constraint for item in result.state.chr_store] == [ConstraintAtom("p", (IntLit(2),))]


def test_run_instantiation_error():
    program = parse_program("p(X) <=> X < Y.")
    result = run(parse_query("p(1)"), program)
    assert result.status is DerivationStatus.ERROR
    assert "<" in result.error


def test_trace_is_deterministic(cancel_program):
    first = run(parse_query("a, a, c"), cancel_program, trace=True)
    second = run(parse_query("a, a, c"), cancel_program, trace=True)
    assert trace_text(first) == trace_text(second)
    kinds = [entry.kind for entry in first.trace]
    assert kinds[:3] == [StepKind.INTRODUCE] * 3
    assert first.trace[3].rule == "pair"
    assert first.trace[3].line().startswith("4\tapply\tpair\t")


def test_check_state_detects_reused_identifiers():
    atom = ConstraintAtom("a")
    with pytest.raises(InvariantViolation):
        check_state(ConcreteState(chr_store=(IdentifiedConstraint(atom, 0), IdentifiedConstraint(atom, 0)), next_id=1))
    with pytest.raises(InvariantViolation):
        check_state(ConcreteState(chr_store=store_of(atom), next_id=0))


HEADS = ["p", "q(X)", "q(1)", "r(X, Y)"]
BODIES = ["p", "q(X)", "q(2)", "r(1, X)", "X = 1", "true", "false"]
GUARDS = ["", "X = 1 | ", "X < 2 | "]
GOALS = ["p", "q(1)", "q(2)", "r(1, 2)", "X = 2", "q(X)"]


@strategies.composite
def gen_program_text(draw):
    lines = []
    for index in range(draw(strategies.integers(1, 4))):
        kept = draw(strategies.lists(strategies.sampled_from(HEADS), max_size=2))
        removed = draw(strategies.lists(strategies.sampled_from(HEADS), min_size=0 if kept else 1, max_size=2))
        guard = draw(strategies.sampled_from(GUARDS))
        body = ", ".join(draw(strategies.lists(strategies.sampled_from(BODIES), min_size=1, max_size=3)))
        priority = draw(strategies.integers(1, 5))
        if not removed:
            lines.append(f"r{index} @ {priority} :: {', '.join(kept)} ==> {guard}{body}.")
        elif kept:
            lines.append(f"r{index} @ {priority} :: {', '.join(kept)} \\ {', '.join(removed)} <=> {guard}{body}.")
        else:
            lines.append(f"r{index} @ {priority} :: {', '.join(removed)} <=> {guard}{body}.")
    return "\n".join(lines)


@settings(max_examples=150, deadline=None)
@given(text=gen_program_text(), goal=strategies.lists(strategies.sampled_from(GOALS), max_size=4))
def test_random_derivations_keep_invariants(text, goal):
    program = parse_program(text)
    result = run(Query(parse_goal(", ".join(goal))), program, step_limit=60, validate=True)
    assert result.status in set(DerivationStatus)
    assert result.steps <= 60
