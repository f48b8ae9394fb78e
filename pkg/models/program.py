"""
CHR abstract syntax: constraint atoms, rules, programs and queries.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, Iterable, List, Optional, Tuple

from models.errors import ProgramError
from models.term import Atom, Compound, Term, Variable, term_variables

Symbol = Tuple[str, int]

# Built-in constraint symbols: `nonvar/1` and `ground/1` may only appear in guards.
BUILTIN_SYMBOLS: FrozenSet[Symbol] = frozenset(
    {
        ("=", 2),
        ("<", 2),
        ("true", 0),
        ("false", 0),
        ("or", 3),
        ("merge", 3),
        ("nonvar", 1),
        ("ground", 1),
    }
)
GUARD_ONLY_SYMBOLS: FrozenSet[Symbol] = frozenset({("nonvar", 1), ("ground", 1)})

# Symbols introduced by the persistent-constraint translation.
RESERVED_SYMBOLS: FrozenSet[Symbol] = frozenset(
    {("f", 1), ("f", 2), ("a", 2), ("c_f", 1), ("c_a", 1)}
)

SIMPLIFICATION_PRIORITY = 3
PROPAGATION_PRIORITY = 4


class ConstraintKind(str, Enum):
    BUILTIN = "builtin"
    USER = "user"


@dataclass(frozen=True, slots=True)
class ConstraintAtom:
    functor: str
    args: Tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def symbol(self) -> Symbol:
        return (self.functor, len(self.args))

    @property
    def kind(self) -> ConstraintKind:
        if self.symbol in BUILTIN_SYMBOLS:
            return ConstraintKind.BUILTIN
        return ConstraintKind.USER

    @property
    def is_builtin(self) -> bool:
        return self.symbol in BUILTIN_SYMBOLS

    def to_term(self) -> Term:
        if not self.args:
            return Atom(self.functor)
        return Compound(self.functor, self.args)

    @classmethod
    def from_term(cls, t: Term) -> "ConstraintAtom":
        if isinstance(t, Atom):
            return cls(t.name, ())
        if isinstance(t, Compound):
            return cls(t.functor, t.args)
        raise ValueError(f"Term {t!r} is not callable as a constraint")

    def variables(self) -> Iterable[Variable]:
        for arg in self.args:
            yield from term_variables(arg)


TRUE = ConstraintAtom("true")
FALSE = ConstraintAtom("false")


def atoms_variables(atoms: Iterable[ConstraintAtom]) -> List[Variable]:
    """Distinct variables of `atoms` in order of first occurrence."""
    seen = {}
    for atom in atoms:
        for var in atom.variables():
            seen.setdefault(var, None)
    return list(seen)


@dataclass(frozen=True)
class Rule:
    name: str
    priority: int
    kept: Tuple[ConstraintAtom, ...]
    removed: Tuple[ConstraintAtom, ...]
    guard: Tuple[ConstraintAtom, ...] = ()
    body: Tuple[ConstraintAtom, ...] = ()

    def __post_init__(self):
        if not self.kept and not self.removed:
            raise ProgramError(f"Rule '{self.name}' has empty heads")
        if self.priority < 1:
            raise ProgramError(f"Rule '{self.name}' has non-positive priority {self.priority}")

    @property
    def is_propagation(self) -> bool:
        return not self.removed

    @property
    def heads(self) -> Tuple[ConstraintAtom, ...]:
        return self.kept + self.removed

    def head_variables(self) -> List[Variable]:
        return atoms_variables(self.heads)

    def local_variables(self) -> List[Variable]:
        """lv(r): variables of guard and body that do not occur in the heads."""
        head = set(self.head_variables())
        return [v for v in atoms_variables(self.guard + self.body) if v not in head]

    def variables(self) -> List[Variable]:
        return atoms_variables(self.heads + self.guard + self.body)


@dataclass(frozen=True)
class Program:
    rules: Tuple[Rule, ...] = ()
    persistent_symbols: FrozenSet[Symbol] = field(default_factory=frozenset)
    linear_symbols: FrozenSet[Symbol] = field(default_factory=frozenset)

    def __post_init__(self):
        names = [rule.name for rule in self.rules]
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            raise ProgramError(f"Duplicate rule names: {', '.join(duplicates)}")

    def is_persistent(self, atom: ConstraintAtom) -> bool:
        return atom.symbol in self.persistent_symbols

    @property
    def simplification_rules(self) -> Tuple[Rule, ...]:
        return tuple(rule for rule in self.rules if not rule.is_propagation)

    def user_symbols(self) -> FrozenSet[Symbol]:
        symbols = set()
        for rule in self.rules:
            for atom in rule.heads + rule.body:
                if not atom.is_builtin:
                    symbols.add(atom.symbol)
        return frozenset(symbols)

    def with_rules(self, rules: Iterable[Rule]) -> "Program":
        return Program(tuple(rules), self.persistent_symbols, self.linear_symbols)


@dataclass(frozen=True)
class Query:
    goal: Tuple[ConstraintAtom, ...]
    globals: Optional[FrozenSet[Variable]] = None

    def __post_init__(self):
        if self.globals is None:
            object.__setattr__(self, "globals", frozenset(atoms_variables(self.goal)))
