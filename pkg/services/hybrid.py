"""
Source-to-source translation of hybrid programs (persistent kept heads,
linear removed heads) into prioritized programs that realize the hybrid
semantics on top of the ordinary engine.

A persistent constraint goes through three forms: fresh `f(c)`, frozen
`f(Stamp, c)` and alive `a(Stamp, c)`.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Tuple

from models.errors import ProgramError
from models.program import (
    PROPAGATION_PRIORITY,
    SIMPLIFICATION_PRIORITY,
    TRUE,
    ConstraintAtom,
    Program,
    Query,
    Rule,
)
from models.term import Compound, IntLit, Term, Variable
from services.lang import validate_hybrid
from services.term import instantiate, unify

logger = logging.getLogger(__name__)

STAMP_PRIORITY = 1
SET_PRIORITY = 2
UNFREEZE_PRIORITY = 5

FRESHENING_SUFFIX = "_h"


@dataclass(frozen=True)
class HybridProgram:
    base: Program

    @classmethod
    def of(cls, program: Program) -> "HybridProgram":
        """Raises ProgramError when `program` is not in hybrid form."""
        violations = validate_hybrid(program)
        if violations:
            details = "; ".join(f"{v.rule}: {v.reason}" for v in violations)
            raise ProgramError(f"Program is not hybrid: {details}")
        return cls(program)


@dataclass(frozen=True)
class ControlSymbols:
    wrap: str = "f"
    alive: str = "a"
    stamp_counter: str = "c_f"
    alive_counter: str = "c_a"

    @classmethod
    def fresh_for(cls, program: Program) -> "ControlSymbols":
        """Default names, each suffixed until no user constraint of the program uses it."""
        used = {functor for functor, _ in program.user_symbols()}
        names = []
        for name in (cls.wrap, cls.alive, cls.stamp_counter, cls.alive_counter):
            while name in used:
                name += FRESHENING_SUFFIX
            used.add(name)
            names.append(name)
        control = cls(*names)
        if control != cls():
            logger.info(f"Control symbols renamed to avoid clashes: {control}")
        return control


@dataclass(frozen=True)
class TranslatedProgram:
    rules: Program
    provenance: Dict[str, Tuple[str, Tuple[str, ...]]] = field(default_factory=dict)
    control: ControlSymbols = ControlSymbols()


def _rule_key(rule: Rule):
    """Identity of a rule up to variable renaming (the name is ignored)."""
    renaming: Dict[Variable, Term] = {}
    for var in rule.variables():
        renaming[var] = Variable(f"V{len(renaming)}")

    def rename(atoms):
        return tuple(ConstraintAtom(a.functor, tuple(instantiate(arg, renaming) for arg in a.args)) for a in atoms)

    return (rule.priority, rename(rule.kept), rename(rule.removed), rename(rule.guard), rename(rule.body))


def _without_true(atoms: Iterable[ConstraintAtom]) -> Tuple[ConstraintAtom, ...]:
    return tuple(atom for atom in atoms if atom != TRUE)


def _collapse(rule: Rule, i: int, j: int) -> Optional[Rule]:
    c, d = rule.kept[i], rule.kept[j]
    if c.symbol != d.symbol:
        return None
    if unify(c.to_term(), d.to_term()) is None:
        return None
    equations = tuple(ConstraintAtom("=", (x, y)) for x, y in zip(c.args, d.args) if x != y)
    guard = equations + _without_true(rule.guard)
    return Rule(
        name=rule.name,
        priority=rule.priority,
        kept=rule.kept[:j] + rule.kept[j + 1:],
        removed=rule.removed,
        guard=guard or (TRUE,),
        body=rule.body,
    )


def step1_saturate(program: HybridProgram) -> Tuple[Program, Dict[str, Tuple[str, Tuple[str, ...]]]]:
    """Add collapsed variants for every pair of unifiable persistent kept heads, to a fixpoint.

    Returns the saturated program and, for every rule, its source rule and the
    chain of rules it was collapsed from.
    """
    base = program.base
    rules: List[Rule] = list(base.rules)
    provenance = {rule.name: (rule.name, ()) for rule in rules}
    seen = {_rule_key(rule) for rule in rules}
    taken = {rule.name for rule in rules}
    counters: Dict[str, int] = {}
    worklist = list(rules)
    while worklist:
        rule = worklist.pop(0)
        source, chain = provenance[rule.name]
        for i in range(len(rule.kept)):
            for j in range(i + 1, len(rule.kept)):
                collapsed = _collapse(rule, i, j)
                if collapsed is None or _rule_key(collapsed) in seen:
                    continue
                seen.add(_rule_key(collapsed))
                name = rule.name
                while name in taken:
                    counters[source] = counters.get(source, 0) + 1
                    name = f"{source}_{counters[source]}"
                taken.add(name)
                derived = Rule(name, collapsed.priority, collapsed.kept, collapsed.removed, collapsed.guard, collapsed.body)
                provenance[name] = (source, chain + (rule.name,))
                rules.append(derived)
                worklist.append(derived)
                logger.debug(f"Collapsed kept heads {i},{j} of '{rule.name}' into '{name}'")
    return base.with_rules(rules), provenance


def _stamp_variables(rule: Rule) -> Iterator[Variable]:
    taken = {var.name for var in rule.variables()}
    for k in itertools.count(1):
        name = f"_S{k}"
        if name not in taken:
            yield Variable(name)


def step2_wrap(program: Program, control: ControlSymbols = ControlSymbols()) -> Program:
    """Wrap persistent kept heads as alive `a(Stamp, c)` and persistent body atoms as fresh `f(d)`."""
    wrapped = []
    for rule in program.rules:
        stamps = _stamp_variables(rule)
        kept = tuple(
            ConstraintAtom(control.alive, (next(stamps), atom.to_term()))
            if program.is_persistent(atom)
            else atom
            for atom in rule.kept
        )
        body = tuple(
            ConstraintAtom(control.wrap, (atom.to_term(),))
            if not atom.is_builtin and program.is_persistent(atom)
            else atom
            for atom in rule.body
        )
        priority = PROPAGATION_PRIORITY if rule.is_propagation else SIMPLIFICATION_PRIORITY
        wrapped.append(Rule(rule.name, priority, kept, rule.removed, rule.guard, body))
    return Program(tuple(wrapped), frozenset(), program.linear_symbols)


def control_rules(control: ControlSymbols = ControlSymbols()) -> Tuple[Rule, Rule, Rule]:
    x, y, z = Variable("X"), Variable("Y"), Variable("Z")
    succ = Compound("+", (y, IntLit(1)))
    stamp = Rule(
        name="stamp",
        priority=STAMP_PRIORITY,
        kept=(),
        removed=(ConstraintAtom(control.wrap, (x,)), ConstraintAtom(control.stamp_counter, (y,))),
        guard=(TRUE,),
        body=(ConstraintAtom(control.wrap, (y, x)), ConstraintAtom(control.stamp_counter, (succ,))),
    )
    set_rule = Rule(
        name="set",
        priority=SET_PRIORITY,
        kept=(ConstraintAtom(control.alive, (y, x)),),
        removed=(ConstraintAtom(control.alive, (z, x)),),
        guard=(ConstraintAtom("<", (y, z)),),
        body=(TRUE,),
    )
    unfreeze = Rule(
        name="unfreeze",
        priority=UNFREEZE_PRIORITY,
        kept=(),
        removed=(ConstraintAtom(control.wrap, (y, x)), ConstraintAtom(control.alive_counter, (y,))),
        guard=(TRUE,),
        body=(ConstraintAtom(control.alive, (y, x)), ConstraintAtom(control.alive_counter, (succ,))),
    )
    return stamp, set_rule, unfreeze


def step3_control(
    program: Program,
    control: ControlSymbols = ControlSymbols(),
    provenance: Optional[Dict[str, Tuple[str, Tuple[str, ...]]]] = None,
) -> TranslatedProgram:
    names = {rule.name for rule in program.rules}
    clash = names & {"stamp", "set", "unfreeze"}
    if clash:
        raise ProgramError(f"Rule names reserved for the translation: {sorted(clash)}")
    extra = control_rules(control)
    provenance = dict(provenance or {})
    for rule in extra:
        provenance[rule.name] = (rule.name, ())
    return TranslatedProgram(program.with_rules(program.rules + extra), provenance, control)


def translate(program: HybridProgram) -> TranslatedProgram:
    control = ControlSymbols.fresh_for(program.base)
    saturated, provenance = step1_saturate(program)
    translated = step3_control(step2_wrap(saturated, control), control, provenance)
    logger.info(
        f"Translated {len(program.base.rules)} hybrid rules into {len(translated.rules.rules)} prioritized rules"
    )
    return translated


def translate_state(
    query: Query,
    persistent_symbols: FrozenSet,
    control: ControlSymbols = ControlSymbols(),
) -> Query:
    """Wrap persistent goal atoms as fresh constraints and add both counters at zero."""
    goal = tuple(
        ConstraintAtom(control.wrap, (atom.to_term(),))
        if not atom.is_builtin and atom.symbol in persistent_symbols
        else atom
        for atom in query.goal
    )
    counters = (
        ConstraintAtom(control.stamp_counter, (IntLit(0),)),
        ConstraintAtom(control.alive_counter, (IntLit(0),)),
    )
    return Query(goal + counters, query.globals)


def unwrap(atom: ConstraintAtom, control: ControlSymbols = ControlSymbols()) -> ConstraintAtom:
    """The user constraint carried by a control wrapper (the atom itself otherwise)."""
    if (atom.functor == control.wrap and atom.arity in (1, 2)) or (atom.functor == control.alive and atom.arity == 2):
        return ConstraintAtom.from_term(atom.args[-1])
    return atom


def describe(translated: TranslatedProgram) -> List[str]:
    return [
        f"{name} <- {source}" + (f" via {', '.join(chain)}" if chain else "")
        for name, (source, chain) in sorted(translated.provenance.items())
    ]


__all__ = [
    "ControlSymbols",
    "HybridProgram",
    "TranslatedProgram",
    "control_rules",
    "step1_saturate",
    "step2_wrap",
    "step3_control",
    "translate",
    "translate_state",
    "unwrap",
]
