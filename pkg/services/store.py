"""
Built-in constraint store over finite trees with ground integer order.

The store is kept in solved (most general unifier) form; `tell` adds a
built-in, `consistent` reports satisfiability and `ask` decides guard
entailment three-valuedly.
"""

import logging
from enum import Enum
from typing import Collection, Iterable, Optional, Tuple

from models.errors import InstantiationError, ProgramError
from models.program import ConstraintAtom
from models.state import EMPTY_STORE, FAILED_STORE, BuiltinStore
from models.term import Substitution, Variable, is_ground
from services.term import eval_ground, fold_arithmetic, instantiate, merge3, or3, unify

logger = logging.getLogger(__name__)


class Entailment(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    UNKNOWN = "unknown"


def consistent(store: BuiltinStore) -> bool:
    return not store.failed


def tell(store: BuiltinStore, constraint: ConstraintAtom) -> BuiltinStore:
    """Add a built-in constraint to the store.

    Raises:
        InstantiationError: `<`, `or` or `merge` told on insufficiently
            instantiated arguments.
        ProgramError: `constraint` is not a tellable built-in.
    """
    if store.failed:
        return store
    bindings = _tell(store.bindings, constraint)
    if bindings is None:
        return FAILED_STORE
    return BuiltinStore(bindings, False)


def tell_all(store: BuiltinStore, constraints: Iterable[ConstraintAtom]) -> BuiltinStore:
    for constraint in constraints:
        store = tell(store, constraint)
        if store.failed:
            break
    return store


def _tell(bindings: Substitution, c: ConstraintAtom) -> Optional[Substitution]:
    symbol = c.symbol
    if symbol == ("true", 0):
        return bindings
    if symbol == ("false", 0):
        return None
    if symbol == ("=", 2):
        return unify(fold_arithmetic(c.args[0], bindings), fold_arithmetic(c.args[1], bindings), bindings)
    if symbol == ("<", 2):
        left, right = eval_ground(c.args[0], bindings), eval_ground(c.args[1], bindings)
        if left is None or right is None:
            raise InstantiationError(f"Arguments of '<' are not ground integers: {c.args}")
        return bindings if left.value < right.value else None
    if symbol == ("or", 3):
        value = or3(c.args[0], c.args[1], bindings)
        if value is None:
            raise InstantiationError(f"Arguments of 'or' are not booleans: {c.args[:2]}")
        return unify(value, c.args[2], bindings)
    if symbol == ("merge", 3):
        if not (is_ground(bindings.apply(c.args[0])) and is_ground(bindings.apply(c.args[1]))):
            raise InstantiationError(f"Arguments of 'merge' are not ground lists: {c.args[:2]}")
        value = merge3(c.args[0], c.args[1], bindings)
        if value is None:
            return None
        return unify(value, c.args[2], bindings)
    raise ProgramError(f"'{c.functor}/{c.arity}' cannot be told to the built-in store")


def entail(
    store: BuiltinStore,
    guard: Iterable[ConstraintAtom],
    local: Collection[Variable] = (),
) -> Tuple[Entailment, BuiltinStore]:
    """Decide a guard conjunction; only `local` variables may receive bindings.

    Returns the verdict together with the store extended by the guard (which
    is only meaningful when the verdict is HOLDS).
    """
    if store.failed:
        return Entailment.FAILS, store
    local = frozenset(local)
    bindings = store.bindings
    for conjunct in guard:
        verdict, bindings = _ask_one(bindings, conjunct, local)
        if verdict is not Entailment.HOLDS:
            return verdict, store
    return Entailment.HOLDS, BuiltinStore(bindings, False)


def ask(
    store: BuiltinStore,
    theta: Substitution,
    guard: Iterable[ConstraintAtom],
    local: Collection[Variable] = (),
) -> Entailment:
    """Three-valued guard check under `store`·`theta`; never mutates the store."""
    instantiated = [ConstraintAtom(c.functor, tuple(instantiate(a, theta.bindings) for a in c.args)) for c in guard]
    verdict, _ = entail(store, instantiated, local)
    return verdict


def _ask_one(
    bindings: Substitution, c: ConstraintAtom, local: frozenset
) -> Tuple[Entailment, Substitution]:
    symbol = c.symbol
    if symbol == ("nonvar", 1):
        if isinstance(bindings.walk(c.args[0]), Variable):
            return Entailment.UNKNOWN, bindings
        return Entailment.HOLDS, bindings
    if symbol == ("ground", 1):
        if is_ground(bindings.apply(c.args[0])):
            return Entailment.HOLDS, bindings
        return Entailment.UNKNOWN, bindings
    if symbol == ("<", 2):
        left, right = eval_ground(c.args[0], bindings), eval_ground(c.args[1], bindings)
        if left is None or right is None:
            return Entailment.UNKNOWN, bindings
        return (Entailment.HOLDS if left.value < right.value else Entailment.FAILS), bindings
    if symbol == ("=", 2):
        left, right = fold_arithmetic(c.args[0], bindings), fold_arithmetic(c.args[1], bindings)
        extended = unify(left, right, bindings, prefer=local.__contains__)
    elif symbol in (("or", 3), ("merge", 3)):
        try:
            extended = _tell(bindings, c)
        except InstantiationError:
            return Entailment.UNKNOWN, bindings
    else:
        extended = _tell(bindings, c)
    if extended is None:
        return Entailment.FAILS, bindings
    for var in extended.bindings:
        if var not in bindings.bindings and var not in local:
            # entailment would need to constrain a variable of the store
            return Entailment.UNKNOWN, bindings
    return Entailment.HOLDS, extended


__all__ = [
    "EMPTY_STORE",
    "FAILED_STORE",
    "BuiltinStore",
    "Entailment",
    "ask",
    "consistent",
    "entail",
    "tell",
    "tell_all",
]
