"""
First-order terms and substitutions shared by every part of the engine.
"""

from dataclasses import dataclass
from typing import Dict, Iterator, Mapping, Optional, Tuple, Union

NIL_NAME = "[]"
CONS_FUNCTOR = "."
TUPLE_FUNCTOR = ","


@dataclass(frozen=True, slots=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class IntLit:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, slots=True)
class Atom:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Compound:
    functor: str
    args: Tuple["Term", ...]

    def __post_init__(self):
        if not self.args:
            raise ValueError(f"Compound '{self.functor}' needs at least one argument")

    @property
    def arity(self) -> int:
        return len(self.args)


Term = Union[Variable, IntLit, Atom, Compound]

NIL = Atom(NIL_NAME)


def cons(head: Term, tail: Term) -> Compound:
    return Compound(CONS_FUNCTOR, (head, tail))


def make_list(items, tail: Term = NIL) -> Term:
    """Build `[i1, ..., in | tail]`."""
    result = tail
    for item in reversed(list(items)):
        result = cons(item, result)
    return result


def make_tuple(*items: Term) -> Term:
    """Build the right-nested comma term `(t1, t2, ..., tn)`."""
    if len(items) == 1:
        return items[0]
    result = items[-1]
    for item in reversed(items[:-1]):
        result = Compound(TUPLE_FUNCTOR, (item, result))
    return result


def term_variables(t: Term) -> Iterator[Variable]:
    """Yield the variables of `t` left-to-right (with repetitions)."""
    stack = [t]
    while stack:
        current = stack.pop()
        if isinstance(current, Variable):
            yield current
        elif isinstance(current, Compound):
            stack.extend(reversed(current.args))


def is_ground(t: Term) -> bool:
    for _ in term_variables(t):
        return False
    return True


class Substitution:
    """Finite map from variables to terms.

    Bindings are stored in triangular form; `apply` resolves them fully, so
    the substitution it denotes is idempotent as long as every binding was
    added through unification (which enforces the occurs check).
    """

    __slots__ = ("_bindings",)

    def __init__(self, bindings: Optional[Mapping[Variable, Term]] = None):
        self._bindings: Dict[Variable, Term] = dict(bindings or {})

    @classmethod
    def empty(cls) -> "Substitution":
        return _EMPTY

    @classmethod
    def adopt(cls, bindings: Dict[Variable, Term]) -> "Substitution":
        """Wrap `bindings` without copying; the caller gives up ownership of the dict."""
        subst = cls.__new__(cls)
        subst._bindings = bindings
        return subst

    @property
    def bindings(self) -> Mapping[Variable, Term]:
        return self._bindings

    def __contains__(self, var: Variable) -> bool:
        return var in self._bindings

    def __len__(self) -> int:
        return len(self._bindings)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Substitution):
            return NotImplemented
        return self.solved() == other.solved()

    def __hash__(self):
        return hash(frozenset(self.solved().items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{v}↦{t}" for v, t in sorted(self.solved().items(), key=lambda kv: kv[0].name))
        return f"Substitution({{{inner}}})"

    def walk(self, t: Term) -> Term:
        """Dereference `t` until it is not a bound variable."""
        bindings = self._bindings
        while isinstance(t, Variable):
            bound = bindings.get(t)
            if bound is None:
                return t
            t = bound
        return t

    def apply(self, t: Term) -> Term:
        t = self.walk(t)
        if isinstance(t, Compound):
            return Compound(t.functor, tuple(self.apply(arg) for arg in t.args))
        return t

    def solved(self) -> Dict[Variable, Term]:
        """The idempotent (fully resolved) form of the bindings."""
        return {var: self.apply(var) for var in self._bindings}


_EMPTY = Substitution()
