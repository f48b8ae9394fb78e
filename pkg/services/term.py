"""
Term algorithms: unification, one-way matching, ground arithmetic, the
standard order of terms and the deterministic host built-ins `merge/3` and
`or/3`.

Failure is returned as `None`; nothing in this module raises on a logical
mismatch.
"""

import itertools
from typing import Callable, List, Mapping, Optional, Tuple

from models.term import (
    CONS_FUNCTOR,
    NIL,
    NIL_NAME,
    Atom,
    Compound,
    IntLit,
    Substitution,
    Term,
    Variable,
    make_list,
)

LESS, EQUAL, GREATER = -1, 0, 1

ARITHMETIC_FUNCTORS = frozenset({"+", "-"})

_fresh_counter = itertools.count()


def fresh_variable(prefix: str = "_G") -> Variable:
    """A variable whose name is unique within the process."""
    return Variable(f"{prefix}{next(_fresh_counter)}")


def occurs(var: Variable, t: Term, under: Substitution) -> bool:
    stack = [t]
    while stack:
        current = under.walk(stack.pop())
        if current == var:
            return True
        if isinstance(current, Compound):
            stack.extend(current.args)
    return False


def unify(
    t1: Term,
    t2: Term,
    under: Optional[Substitution] = None,
    prefer: Optional[Callable[[Variable], bool]] = None,
) -> Optional[Substitution]:
    """Most general unifier of `t1` and `t2` extending `under`, or None.

    When two unbound variables meet, the one accepted by `prefer` (if any) is
    the one that gets bound.
    """
    subst = under if under is not None else Substitution.empty()
    bindings = dict(subst.bindings)
    current = Substitution.adopt(bindings)
    stack: List[Tuple[Term, Term]] = [(t1, t2)]
    while stack:
        left, right = stack.pop()
        left = current.walk(left)
        right = current.walk(right)
        if left == right:
            continue
        if isinstance(left, Variable) and isinstance(right, Variable):
            if prefer is not None and prefer(right) and not prefer(left):
                left, right = right, left
            bindings[left] = right
            continue
        if isinstance(right, Variable):
            left, right = right, left
        if isinstance(left, Variable):
            if occurs(left, right, current):
                return None
            bindings[left] = right
            continue
        if isinstance(left, Compound) and isinstance(right, Compound):
            if left.functor != right.functor or len(left.args) != len(right.args):
                return None
            stack.extend(zip(left.args, right.args))
            continue
        # distinct constants, or a constant against a compound
        return None
    return current


def match(
    pattern: Term,
    subject: Term,
    under: Optional[Substitution] = None,
    store: Optional[Substitution] = None,
) -> Optional[Substitution]:
    """One-way matching: bind only variables of `pattern` so that it equals `subject`.

    `store` dereferences the subject (the built-in store the subject lives in);
    pattern variables are never looked up in it.
    """
    theta = under if under is not None else Substitution.empty()
    deref = store.walk if store is not None else (lambda t: t)
    bindings = dict(theta.bindings)
    stack = [(pattern, subject)]
    while stack:
        p, s = stack.pop()
        s = deref(s)
        if isinstance(p, Variable):
            bound = bindings.get(p)
            if bound is None:
                bindings[p] = s
            elif not _identical(bound, s, deref):
                return None
            continue
        if isinstance(p, Compound):
            if not isinstance(s, Compound) or s.functor != p.functor or len(s.args) != len(p.args):
                return None
            stack.extend(zip(p.args, s.args))
            continue
        if p != s:
            return None
    return Substitution.adopt(bindings)


def _identical(t1: Term, t2: Term, deref) -> bool:
    stack = [(t1, t2)]
    while stack:
        a, b = stack.pop()
        a, b = deref(a), deref(b)
        if a is b:
            continue
        if isinstance(a, Compound) and isinstance(b, Compound):
            if a.functor != b.functor or len(a.args) != len(b.args):
                return False
            stack.extend(zip(a.args, b.args))
        elif a != b:
            return False
    return True


def instantiate(t: Term, mapping: Mapping[Variable, Term]) -> Term:
    """Single-pass substitution: replace mapped variables, leave the rest."""
    if isinstance(t, Variable):
        return mapping.get(t, t)
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(instantiate(arg, mapping) for arg in t.args))
    return t


def eval_ground(t: Term, under: Optional[Substitution] = None) -> Optional[IntLit]:
    """Evaluate a ground `+`/`-` expression over integers; None if it is not one."""
    if under is not None:
        t = under.walk(t)
    if isinstance(t, IntLit):
        return t
    if isinstance(t, Compound) and t.functor in ARITHMETIC_FUNCTORS:
        values = [eval_ground(arg, under) for arg in t.args]
        if any(v is None for v in values):
            return None
        if t.functor == "+" and len(values) == 2:
            return IntLit(values[0].value + values[1].value)
        if t.functor == "-" and len(values) == 2:
            return IntLit(values[0].value - values[1].value)
        if t.functor == "-" and len(values) == 1:
            return IntLit(-values[0].value)
    return None


def fold_arithmetic(t: Term, under: Optional[Substitution] = None) -> Term:
    """Replace every arithmetic subterm that is ground under `under` by its value."""
    if under is not None:
        t = under.walk(t)
    if isinstance(t, Compound):
        if t.functor in ARITHMETIC_FUNCTORS:
            value = eval_ground(t, under)
            if value is not None:
                return value
        return Compound(t.functor, tuple(fold_arithmetic(arg, under) for arg in t.args))
    return t


def term_key(t: Term):
    """Sort key realizing the standard order: IntLit < Atom < Variable < Compound."""
    if isinstance(t, IntLit):
        return (0, t.value)
    if isinstance(t, Atom):
        return (1, t.name)
    if isinstance(t, Variable):
        return (2, t.name)
    return (3, len(t.args), t.functor, tuple(term_key(arg) for arg in t.args))


def term_compare(t1: Term, t2: Term) -> int:
    k1, k2 = term_key(t1), term_key(t2)
    if k1 < k2:
        return LESS
    if k1 > k2:
        return GREATER
    return EQUAL


def list_elements(t: Term, under: Optional[Substitution] = None) -> Optional[List[Term]]:
    """Elements of a proper list, or None when the spine is open or not a list."""
    items = []
    current = under.walk(t) if under is not None else t
    while True:
        if isinstance(current, Atom) and current.name == NIL_NAME:
            return items
        if isinstance(current, Compound) and current.functor == CONS_FUNCTOR and len(current.args) == 2:
            items.append(current.args[0])
            current = under.walk(current.args[1]) if under is not None else current.args[1]
            continue
        return None


def merge3(l1: Term, l2: Term, under: Optional[Substitution] = None) -> Optional[Term]:
    """Ordered, duplicate-free union of two proper lists."""
    first = list_elements(l1, under)
    second = list_elements(l2, under)
    if first is None or second is None:
        return None
    resolve = under.apply if under is not None else (lambda x: x)
    unique = {}
    for item in itertools.chain(first, second):
        item = resolve(item)
        unique.setdefault(term_key(item), item)
    return make_list(unique[key] for key in sorted(unique))


def or3(b1: Term, b2: Term, under: Optional[Substitution] = None) -> Optional[IntLit]:
    if under is not None:
        b1, b2 = under.walk(b1), under.walk(b2)
    if not (isinstance(b1, IntLit) and b1.value in (0, 1)):
        return None
    if not (isinstance(b2, IntLit) and b2.value in (0, 1)):
        return None
    return IntLit(1 if b1.value or b2.value else 0)


__all__ = [
    "EQUAL",
    "GREATER",
    "LESS",
    "NIL",
    "eval_ground",
    "fold_arithmetic",
    "fresh_variable",
    "instantiate",
    "list_elements",
    "match",
    "merge3",
    "or3",
    "term_compare",
    "term_key",
    "unify",
]
