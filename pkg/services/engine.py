"""
Prioritized operational semantics: Solve, Introduce and Apply transitions over
concrete states, and the derivation driver used by every other service.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, replace
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from models.errors import InstantiationError, InvariantViolation
from models.program import ConstraintAtom, Program, Query, Rule, Symbol
from models.state import (
    ConcreteState,
    DerivationResult,
    DerivationStatus,
    IdentifiedConstraint,
    StepKind,
    Token,
    TraceEntry,
)
from models.term import Substitution, Term, Variable
from services.store import EMPTY_STORE, Entailment, entail, tell
from services.term import fold_arithmetic, fresh_variable, instantiate, match

logger = logging.getLogger(__name__)

DEFAULT_STEP_LIMIT = 100_000


@dataclass(frozen=True)
class RuleInstance:
    rule: Rule
    index: int
    theta: Substitution
    kept_ids: Tuple[int, ...]
    removed_ids: Tuple[int, ...]

    @property
    def token(self) -> Token:
        return (self.rule.name, self.kept_ids + self.removed_ids)


def initial_state(query: Query) -> ConcreteState:
    return ConcreteState(goal=tuple(query.goal), builtins=EMPTY_STORE, globals=frozenset(query.globals))


def _instantiate_atom(atom: ConstraintAtom, mapping: Mapping[Variable, Term]) -> ConstraintAtom:
    return ConstraintAtom(atom.functor, tuple(instantiate(arg, mapping) for arg in atom.args))


def solve_step(state: ConcreteState) -> Optional[ConcreteState]:
    """Tell the leftmost goal constraint if it is a built-in.

    Raises:
        InstantiationError: The built-in cannot be decided on its arguments.
    """
    if not state.goal or not state.goal[0].is_builtin:
        return None
    head = state.goal[0]
    bindings = state.builtins.bindings
    folded = ConstraintAtom(head.functor, tuple(fold_arithmetic(arg, bindings) for arg in head.args))
    return replace(state, goal=state.goal[1:], builtins=tell(state.builtins, folded))


def introduce_step(state: ConcreteState) -> Optional[ConcreteState]:
    """Move the leftmost goal constraint into the CHR store with the next identifier."""
    if not state.goal or state.goal[0].is_builtin:
        return None
    head = state.goal[0]
    bindings = state.builtins.bindings
    folded = ConstraintAtom(head.functor, tuple(fold_arithmetic(arg, bindings) for arg in head.args))
    return replace(
        state,
        goal=state.goal[1:],
        chr_store=state.chr_store + (IdentifiedConstraint(folded, state.next_id),),
        next_id=state.next_id + 1,
    )


def _buckets(state: ConcreteState) -> Dict[Symbol, List[IdentifiedConstraint]]:
    buckets: Dict[Symbol, List[IdentifiedConstraint]] = defaultdict(list)
    for item in state.chr_store:
        buckets[item.constraint.symbol].append(item)
    for items in buckets.values():
        items.sort(key=lambda item: item.id)
    return buckets


def _head_matches(
    heads: Sequence[ConstraintAtom],
    buckets: Mapping[Symbol, List[IdentifiedConstraint]],
    store: Substitution,
    theta: Substitution,
    used: Tuple[int, ...],
) -> Iterator[Tuple[Substitution, Tuple[int, ...]]]:
    if not heads:
        yield theta, used
        return
    head, rest = heads[0], heads[1:]
    for item in buckets.get(head.symbol, ()):
        if item.id in used:
            continue
        extended = theta
        for pattern, subject in zip(head.args, item.constraint.args):
            extended = match(pattern, subject, extended, store)
            if extended is None:
                break
        if extended is None:
            continue
        yield from _head_matches(rest, buckets, store, extended, used + (item.id,))


class _RuleTable:
    """Rules in firing order with their locals renamed apart from any store variable."""

    def __init__(self, program: Program):
        indexed = list(enumerate(program.rules))
        indexed.sort(key=lambda pair: (pair[1].priority, pair[0]))
        self.entries: List[Tuple[int, Rule, Tuple[Variable, ...], Tuple[ConstraintAtom, ...]]] = []
        for index, rule in indexed:
            local = tuple(rule.local_variables())
            renaming = {var: fresh_variable("_L") for var in local}
            guard = tuple(_instantiate_atom(atom, renaming) for atom in rule.guard)
            self.entries.append((index, rule, tuple(renaming.values()), guard))


def _instances(state: ConcreteState, table: _RuleTable) -> Iterator[RuleInstance]:
    buckets = _buckets(state)
    store = state.builtins.bindings
    for index, rule, local, guard in table.entries:
        heads = rule.kept + rule.removed
        for theta, ids in _head_matches(heads, buckets, store, Substitution.empty(), ()):
            instance = RuleInstance(rule, index, theta, ids[: len(rule.kept)], ids[len(rule.kept):])
            if instance.token in state.tokens:
                continue
            instantiated = [_instantiate_atom(atom, theta.bindings) for atom in guard]
            verdict, _ = entail(state.builtins, instantiated, local)
            if verdict is Entailment.HOLDS:
                yield instance


def applicable_instances(state: ConcreteState, program: Program) -> List[RuleInstance]:
    """Every Apply candidate at the most urgent priority level that has one.

    Ordered by priority, rule textual order and ascending head identifiers.
    """
    if state.goal or state.builtins.failed:
        return []
    found: List[RuleInstance] = []
    for instance in _instances(state, _RuleTable(program)):
        if found and instance.rule.priority != found[0].rule.priority:
            break
        found.append(instance)
    return found


def _fire(state: ConcreteState, instance: RuleInstance) -> ConcreteState:
    rule = instance.rule
    mapping = dict(instance.theta.bindings)
    for var in rule.local_variables():
        mapping[var] = fresh_variable()
    guard = [_instantiate_atom(atom, mapping) for atom in rule.guard]
    verdict, builtins = entail(state.builtins, guard, [mapping[var] for var in rule.local_variables()])
    if verdict is not Entailment.HOLDS:
        raise InvariantViolation(f"Guard of '{rule.name}' no longer holds when firing")
    removed = set(instance.removed_ids)
    body = tuple(
        ConstraintAtom(atom.functor, tuple(fold_arithmetic(arg, builtins.bindings) for arg in atom.args))
        for atom in (_instantiate_atom(atom, mapping) for atom in rule.body)
    )
    return replace(
        state,
        goal=body + state.goal,
        chr_store=tuple(item for item in state.chr_store if item.id not in removed),
        builtins=builtins,
        tokens=state.tokens | {instance.token},
    )


def apply_step(state: ConcreteState, program: Program) -> Optional[ConcreteState]:
    """Fire the first applicable rule instance, or None when no rule applies."""
    if state.goal:
        return None
    instance = next(_instances(state, _RuleTable(program)), None)
    if instance is None:
        return None
    return _fire(state, instance)


def check_state(state: ConcreteState) -> None:
    """Raise InvariantViolation when identifiers are reused or not below next_id."""
    ids = [item.id for item in state.chr_store]
    if len(ids) != len(set(ids)):
        raise InvariantViolation(f"Duplicate constraint identifiers in store: {sorted(ids)}")
    for identifier in ids:
        if identifier >= state.next_id:
            raise InvariantViolation(f"Identifier {identifier} is not below next_id {state.next_id}")


def _check_apply(
    before: ConcreteState,
    after: ConcreteState,
    instance: RuleInstance,
    table: _RuleTable,
    program: Program,
) -> None:
    if instance.token in before.tokens:
        raise InvariantViolation(f"Token {instance.token} fired twice")
    for other in _instances(before, table):
        if other.rule.priority < instance.rule.priority:
            raise InvariantViolation(
                f"Rule '{instance.rule.name}' fired at priority {instance.rule.priority} while "
                f"'{other.rule.name}' was applicable at priority {other.rule.priority}"
            )
        if other.rule.priority > instance.rule.priority:
            break
    if not program.simplification_rules:
        remaining = {item.id for item in after.chr_store}
        lost = [item.id for item in before.chr_store if item.id not in remaining]
        if lost:
            raise InvariantViolation(f"Propagation-only derivation removed constraints {lost}")


def run(
    query: Query,
    program: Program,
    step_limit: int = DEFAULT_STEP_LIMIT,
    trace: bool = False,
    validate: bool = False,
    state: Optional[ConcreteState] = None,
) -> DerivationResult:
    """Drive a derivation to a final state.

    Args:
        query: The initial goal and its global variables.
        program: The rules to apply.
        step_limit: Maximum number of transitions.
        trace: Record a TraceEntry for every transition.
        validate: Re-check state invariants after every transition.
        state: Start from this state instead of the query's initial state.

    Returns:
        DerivationResult whose status distinguishes success, failure, an
        instantiation error and an exhausted step budget.

    Raises:
        InvariantViolation: Only when `validate` is set and an invariant breaks.
    """
    if step_limit <= 0:
        raise ValueError(f"step_limit must be positive, got {step_limit}")
    current = state if state is not None else initial_state(query)
    table = _RuleTable(program)
    entries: List[TraceEntry] = []
    steps = 0
    while True:
        if current.builtins.failed:
            return DerivationResult(DerivationStatus.FAILED, current, steps, entries)
        if steps >= step_limit:
            logger.info(f"Step limit {step_limit} reached")
            return DerivationResult(DerivationStatus.STEP_LIMIT, current, steps, entries)
        before = current
        rule_name = None
        instance_ids: Tuple[int, ...] = ()
        try:
            if current.goal and current.goal[0].is_builtin:
                kind, current = StepKind.SOLVE, solve_step(current)
            elif current.goal:
                kind, current = StepKind.INTRODUCE, introduce_step(current)
            else:
                instance = next(_instances(current, table), None)
                if instance is None:
                    return DerivationResult(DerivationStatus.SUCCESS, current, steps, entries)
                kind, current = StepKind.APPLY, _fire(current, instance)
                rule_name, instance_ids = instance.rule.name, instance.token[1]
                if validate:
                    _check_apply(before, current, instance, table, program)
        except InstantiationError as e:
            logger.warning(f"Derivation aborted after {steps} steps: {e}")
            return DerivationResult(DerivationStatus.ERROR, before, steps, entries, str(e))
        steps += 1
        if validate:
            check_state(current)
        if trace:
            entries.append(
                TraceEntry(steps, kind, rule_name, instance_ids, before, len(current.chr_store), len(current.tokens))
            )


def trace_text(result: DerivationResult) -> str:
    return "".join(entry.line() + "\n" for entry in result.trace)
