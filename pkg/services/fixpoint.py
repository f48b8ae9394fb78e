"""
Explicit-state fixpoint semantics over finite ground fragments.

States are canonical multisets of ground user constraints; every inconsistent
state collapses to the single representative BOTTOM. The enumerator ignores
priorities and tokens: it explores every rule instance and every head
selection.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Iterator, Optional, Sequence, Set, Tuple, Union

from models.errors import GroundingError, InstantiationError, TruncatedSystemError
from models.program import ConstraintAtom, Program, Rule, Symbol
from models.term import Substitution, is_ground
from services.hybrid import HybridProgram
from services.lang import atoms_text
from services.store import EMPTY_STORE, BuiltinStore, Entailment, entail, tell
from services.term import fold_arithmetic, instantiate, match, term_key

logger = logging.getLogger(__name__)

DEFAULT_BOUND = 10_000


@dataclass(frozen=True, order=False)
class CanonState:
    atoms: Tuple[ConstraintAtom, ...] = ()
    consistent: bool = True
    persistent_dedup: bool = False

    @property
    def is_answer(self) -> bool:
        return self.consistent and not self.atoms

    def is_purely_persistent(self, persistent: FrozenSet[Symbol]) -> bool:
        return all(atom.symbol in persistent for atom in self.atoms)

    def __str__(self) -> str:
        if not self.consistent:
            return "⊥"
        return "{" + atoms_text(self.atoms) + "}"


BOTTOM = CanonState((), False, False)


def _atom_key(atom: ConstraintAtom):
    return term_key(atom.to_term())


def canon(
    atoms: Iterable[ConstraintAtom],
    persistent: FrozenSet[Symbol] = frozenset(),
    contraction: bool = False,
) -> CanonState:
    atoms = list(atoms)
    for atom in atoms:
        if not all(is_ground(arg) for arg in atom.args):
            raise GroundingError("abstract enumeration requires ground fragment")
    if contraction:
        unique, kept = set(), []
        for atom in atoms:
            if atom.symbol in persistent:
                if atom in unique:
                    continue
                unique.add(atom)
            kept.append(atom)
        atoms = kept
    return CanonState(tuple(sorted(atoms, key=_atom_key)), True, contraction)


def canon_root(
    goal: Sequence[ConstraintAtom],
    program: Optional[Program] = None,
    contraction: bool = False,
) -> CanonState:
    """Canonical state of a ground goal; built-ins are decided, user atoms folded.

    Raises:
        GroundingError: The goal mentions variables.
    """
    store = EMPTY_STORE
    user = []
    for atom in goal:
        if atom.is_builtin:
            try:
                store = tell(store, atom)
            except InstantiationError as e:
                raise GroundingError(f"abstract enumeration requires ground fragment: {e}") from None
        else:
            user.append(ConstraintAtom(atom.functor, tuple(fold_arithmetic(arg) for arg in atom.args)))
    if store.failed:
        return BOTTOM
    if store.bindings:
        raise GroundingError("abstract enumeration requires ground fragment")
    persistent = program.persistent_symbols if program is not None else frozenset()
    return canon(user, persistent, contraction)


@dataclass(frozen=True)
class GroundTransitionSystem:
    states: FrozenSet[CanonState]
    edges: FrozenSet[Tuple[CanonState, str, CanonState]]
    truncated: bool
    bound: int
    roots: Tuple[CanonState, ...] = ()
    persistent: FrozenSet[Symbol] = frozenset()
    expanded: FrozenSet[CanonState] = frozenset()
    _succ: Dict[CanonState, Set[CanonState]] = field(default_factory=dict, compare=False, repr=False)
    _pred: Dict[CanonState, Set[CanonState]] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        for source, _, target in self.edges:
            self._succ.setdefault(source, set()).add(target)
            self._pred.setdefault(target, set()).add(source)

    def successors(self, state: CanonState) -> Set[CanonState]:
        return self._succ.get(state, set())

    def predecessors(self, state: CanonState) -> Set[CanonState]:
        return self._pred.get(state, set())

    def reachable(self, root: CanonState) -> Set[CanonState]:
        seen = {root}
        queue = deque([root])
        while queue:
            for target in self.successors(queue.popleft()):
                if target not in seen:
                    seen.add(target)
                    queue.append(target)
        return seen


def rule_successors(
    rule: Rule,
    state: CanonState,
    persistent: FrozenSet[Symbol] = frozenset(),
    contraction: bool = False,
) -> Set[CanonState]:
    """All states reachable from `state` by one application of `rule`.

    Raises:
        GroundingError: An application leaves a variable unbound.
    """
    if not state.consistent:
        return set()
    heads = rule.kept + rule.removed
    # with contraction a persistent kept-head atom may serve several kept heads
    reusable = [contraction and atom.symbol in persistent for atom in rule.kept] + [False] * len(rule.removed)
    local = rule.local_variables()
    results = set()
    for theta, used in select_heads(heads, state.atoms, reusable):
        guard = [ConstraintAtom(a.functor, tuple(instantiate(arg, theta.bindings) for arg in a.args)) for a in rule.guard]
        verdict, store = entail(EMPTY_STORE, guard, local)
        if verdict is not Entailment.HOLDS:
            if verdict is Entailment.UNKNOWN:
                raise GroundingError(f"abstract enumeration requires ground fragment (guard of '{rule.name}')")
            continue
        results.add(_apply_body(rule, theta, used[len(rule.kept):], state, store, persistent, contraction))
    return results


def select_heads(
    heads: Sequence[ConstraintAtom],
    atoms: Sequence[ConstraintAtom],
    reusable: Sequence[bool],
) -> Iterator[Tuple[Substitution, Tuple[int, ...]]]:
    """Matchings of `heads` against distinct positions of `atoms`.

    Identical copies are interchangeable: per head only the first unused copy
    of each distinct atom is tried, and at most one already used copy.
    """

    def walk(position: int, theta: Substitution, used: Tuple[int, ...]):
        if position == len(heads):
            yield theta, used
            return
        head = heads[position]
        tried_fresh, tried_reused = set(), set()
        for index, atom in enumerate(atoms):
            if atom.symbol != head.symbol:
                continue
            if index in used:
                shared = [p for p, i in enumerate(used) if i == index]
                if not (reusable[position] and all(reusable[p] for p in shared)):
                    continue
                if atom in tried_reused:
                    continue
                tried_reused.add(atom)
            else:
                if atom in tried_fresh:
                    continue
                tried_fresh.add(atom)
            extended = theta
            for pattern, subject in zip(head.args, atom.args):
                extended = match(pattern, subject, extended)
                if extended is None:
                    break
            if extended is not None:
                yield from walk(position + 1, extended, used + (index,))

    yield from walk(0, Substitution.empty(), ())


def _apply_body(
    rule: Rule,
    theta: Substitution,
    removed: Tuple[int, ...],
    state: CanonState,
    store: BuiltinStore,
    persistent: FrozenSet[Symbol],
    contraction: bool,
) -> CanonState:
    added = []
    for atom in rule.body:
        instantiated = ConstraintAtom(atom.functor, tuple(instantiate(arg, theta.bindings) for arg in atom.args))
        if instantiated.is_builtin:
            try:
                folded = ConstraintAtom(
                    instantiated.functor, tuple(fold_arithmetic(arg, store.bindings) for arg in instantiated.args)
                )
                store = tell(store, folded)
            except InstantiationError as e:
                raise GroundingError(f"abstract enumeration requires ground fragment: {e}") from None
            if store.failed:
                return BOTTOM
        else:
            added.append(instantiated)
    resolved = [
        ConstraintAtom(atom.functor, tuple(fold_arithmetic(store.resolve(arg), store.bindings) for arg in atom.args))
        for atom in added
    ]
    gone = set(removed)
    remaining = [atom for index, atom in enumerate(state.atoms) if index not in gone]
    return canon(remaining + resolved, persistent, contraction)


def enumerate_system(
    program: Program,
    roots: Iterable[CanonState],
    bound: int = DEFAULT_BOUND,
    contraction: bool = False,
) -> GroundTransitionSystem:
    """Breadth-first closure of all abstract transitions, up to `bound` distinct states.

    Raises:
        GroundingError: A reachable state is not ground.
    """
    roots = tuple(roots)
    persistent = program.persistent_symbols
    states: Set[CanonState] = set()
    queue = deque()
    truncated = False
    for root in roots:
        if root in states:
            continue
        if len(states) >= bound:
            truncated = True
            break
        states.add(root)
        queue.append(root)
    edges = set()
    expanded = set()
    while queue:
        state = queue.popleft()
        expanded.add(state)
        for rule in program.rules:
            for target in rule_successors(rule, state, persistent, contraction):
                if target not in states:
                    if len(states) >= bound:
                        truncated = True
                        continue
                    states.add(target)
                    queue.append(target)
                edges.add((state, rule.name, target))
    if truncated:
        logger.warning(f"State space truncated at {bound} states")
    logger.debug(f"Enumerated {len(states)} states and {len(edges)} edges")
    return GroundTransitionSystem(
        frozenset(states), frozenset(edges), truncated, bound, roots, persistent, frozenset(expanded)
    )


def _backward_closure(ts: GroundTransitionSystem, seed: Iterable[CanonState]) -> Set[CanonState]:
    closed = set(seed)
    worklist = list(closed)
    while worklist:
        state = worklist.pop()
        for source in ts.predecessors(state):
            if source not in closed:
                closed.add(source)
                worklist.append(source)
    return closed


def lfp_csr(ts: GroundTransitionSystem) -> FrozenSet[CanonState]:
    """States with some derivation to a consistent answer state.

    Raises:
        TruncatedSystemError: `ts` was cut off by its bound.
    """
    if ts.truncated:
        raise TruncatedSystemError(f"Least fixpoint needs the complete system (bound {ts.bound} reached)")
    seed = [state for state in ts.states if state.is_answer]
    return frozenset(state for state in _backward_closure(ts, seed) if state.consistent)


class BoundedVerdict(str, Enum):
    INCONSISTENT_REACHABLE = "inconsistent-reachable"
    NO_INCONSISTENCY_WITHIN_BOUND = "no-inconsistency-within-bound"


def gfp_cpr(ts: GroundTransitionSystem) -> Union[FrozenSet[CanonState], Dict[CanonState, BoundedVerdict]]:
    """States from which no derivation reaches BOTTOM.

    On a truncated system the answer is a per-root verdict instead: reaching
    BOTTOM is conclusive, its absence only holds within the explored part.
    """
    bad = _backward_closure(ts, [state for state in ts.states if not state.consistent])
    if not ts.truncated:
        return frozenset(state for state in ts.states if state not in bad)
    return {
        root: BoundedVerdict.INCONSISTENT_REACHABLE if root in bad else BoundedVerdict.NO_INCONSISTENCY_WITHIN_BOUND
        for root in ts.roots
    }


def hybrid_systems(
    hybrid: HybridProgram,
    roots: Iterable[CanonState],
    bound: int = DEFAULT_BOUND,
) -> Tuple[GroundTransitionSystem, GroundTransitionSystem]:
    """The full system under contraction and the simplification-only system over its states."""
    program = hybrid.base
    full = enumerate_system(program, roots, bound, contraction=True)
    simplifications = program.with_rules(program.simplification_rules)
    simpl = enumerate_system(simplifications, sorted(full.states, key=str), max(bound, len(full.states)), contraction=True)
    return full, simpl


def hybrid_nested(ts_full: GroundTransitionSystem, ts_simpl: GroundTransitionSystem) -> FrozenSet[CanonState]:
    """Greatest fixpoint over full transitions of the states that simplify to a purely persistent state.

    Raises:
        TruncatedSystemError: Either system was cut off by its bound.
    """
    if ts_full.truncated or ts_simpl.truncated:
        raise TruncatedSystemError("Hybrid fixpoint needs complete systems")
    persistent = ts_full.persistent
    seed = [s for s in ts_simpl.states if s.consistent and s.is_purely_persistent(persistent)]
    inner = {s for s in _backward_closure(ts_simpl, seed) if s.consistent}
    members = {s for s in ts_full.states if s in inner}
    changed = True
    while changed:
        changed = False
        for state in list(members):
            if any(target not in members for target in ts_full.successors(state)):
                members.discard(state)
                changed = True
    return frozenset(members)


class Sufficiency(str, Enum):
    YES_WITHIN_BOUND = "yes-within-bound"
    COUNTEREXAMPLE = "counterexample"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class SufficiencyResult:
    verdict: Sufficiency
    state: Optional[CanonState] = None


def data_sufficient_bounded(hybrid: HybridProgram, root: CanonState, bound: int = DEFAULT_BOUND) -> SufficiencyResult:
    """Check, within `bound`, that every reachable state simplifies to a purely persistent one.

    BOTTOM counts as purely persistent (it has no linear residue).
    """
    program = hybrid.base
    full = enumerate_system(program, [root], bound, contraction=True)
    simplifications = program.with_rules(program.simplification_rules)
    persistent = program.persistent_symbols
    inconclusive = full.truncated
    for state in sorted(full.states, key=str):
        simpl = enumerate_system(simplifications, [state], bound, contraction=True)
        if any(not s.consistent or s.is_purely_persistent(persistent) for s in simpl.states):
            continue
        if simpl.truncated:
            inconclusive = True
            continue
        logger.info(f"State {state} cannot be simplified to a purely persistent state")
        return SufficiencyResult(Sufficiency.COUNTEREXAMPLE, state)
    if inconclusive:
        return SufficiencyResult(Sufficiency.INCONCLUSIVE)
    return SufficiencyResult(Sufficiency.YES_WITHIN_BOUND)


def horn_consistent(program: Program, atoms: Iterable[ConstraintAtom], max_facts: int = DEFAULT_BOUND) -> Optional[bool]:
    """Forward-chain the rules as ground Horn clauses over a set of facts.

    Returns False when `false` (or a failing built-in) is derived, True at a
    fixpoint, None when more than `max_facts` facts are derived.
    """
    root = canon_root(list(atoms))
    if not root.consistent:
        return False
    facts: Set[ConstraintAtom] = set(root.atoms)
    changed = True
    while changed:
        changed = False
        ordered = sorted(facts, key=_atom_key)
        for rule in program.rules:
            heads = rule.kept + rule.removed
            for theta, _ in select_heads(heads, ordered, [True] * len(heads)):
                guard = [
                    ConstraintAtom(a.functor, tuple(instantiate(arg, theta.bindings) for arg in a.args))
                    for a in rule.guard
                ]
                verdict, store = entail(EMPTY_STORE, guard, rule.local_variables())
                if verdict is not Entailment.HOLDS:
                    continue
                target = _apply_body(rule, theta, (), CanonState(), store, frozenset(), False)
                if not target.consistent:
                    return False
                for atom in target.atoms:
                    if atom not in facts:
                        facts.add(atom)
                        changed = True
                if len(facts) > max_facts:
                    return None
    return True


