"""
Concrete derivation states of the prioritized CHR machine and the records a
derivation leaves behind.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import FrozenSet, List, Optional, Tuple

from models.program import ConstraintAtom
from models.term import Substitution, Term, Variable

@dataclass(frozen=True)
class BuiltinStore:
    """Built-in constraints in solved form; `failed` marks an inconsistent store."""

    bindings: Substitution = Substitution.empty()
    failed: bool = False

    def resolve(self, t: Term) -> Term:
        return self.bindings.apply(t)

    def walk(self, t: Term) -> Term:
        return self.bindings.walk(t)


EMPTY_STORE = BuiltinStore()
FAILED_STORE = BuiltinStore(Substitution.empty(), True)

# (rule name, identifiers of the head constraints in head order)
Token = Tuple[str, Tuple[int, ...]]


@dataclass(frozen=True, slots=True)
class IdentifiedConstraint:
    constraint: ConstraintAtom
    id: int


@dataclass(frozen=True)
class ConcreteState:
    goal: Tuple[ConstraintAtom, ...] = ()
    chr_store: Tuple[IdentifiedConstraint, ...] = ()
    builtins: BuiltinStore = EMPTY_STORE
    tokens: FrozenSet[Token] = frozenset()
    globals: FrozenSet[Variable] = frozenset()
    next_id: int = 0

    @property
    def is_final(self) -> bool:
        return not self.goal


class StepKind(str, Enum):
    SOLVE = "solve"
    INTRODUCE = "introduce"
    APPLY = "apply"


class DerivationStatus(str, Enum):
    SUCCESS = "success"
    FAILED = "failed"
    ERROR = "error"
    STEP_LIMIT = "step_limit"


@dataclass(frozen=True)
class TraceEntry:
    step: int
    kind: StepKind
    rule: Optional[str]
    instance: Tuple[int, ...]
    before: ConcreteState
    store_size: int
    token_count: int

    def line(self) -> str:
        return f"{self.step}\t{self.kind.value}\t{self.rule or '-'}\t{self.store_size}\t{self.token_count}"


@dataclass
class DerivationResult:
    status: DerivationStatus
    state: ConcreteState
    steps: int
    trace: List[TraceEntry] = field(default_factory=list)
    error: Optional[str] = None
