"""
Coinductive applications: bisimulation of binary automata and equivalence of
regular expressions through a derivative-based destructor program, both run
on the hybrid translation. Also holds the direct (CHR-free) oracles used to
cross-check them.
"""

import functools
import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

from lark import Lark, Transformer
from lark.exceptions import UnexpectedInput, VisitError

from models.errors import ChrParseError, DerivationError, ProgramError
from models.program import ConstraintAtom, Program, Query
from models.state import DerivationResult, DerivationStatus
from models.term import CONS_FUNCTOR, NIL, NIL_NAME, TUPLE_FUNCTOR, Atom, Compound, IntLit, Term, Variable, make_list
from services.engine import DEFAULT_STEP_LIMIT, run
from services.hybrid import HybridProgram, TranslatedProgram, translate, translate_state
from services.lang import parse_program, scalar_goal, scalar_program, term_text

logger = logging.getLogger(__name__)

ALPHABET = ("a", "b")
DEFAULT_SCALE = 3

BISIM_PROGRAM = r"""
:- persistent f/2.
:- persistent ~/2.

bisim @ f(L, (Lt, La, Lb)), f(K, (Kt, Ka, Kb)), L ~ K ==> Lt = Kt, La ~ Ka, Lb ~ Kb.
"""

DESTRUCTOR_PROGRAM = r"""
:- persistent ~/2.
:- linear f/2.
:- linear f_conc/5.
:- linear f_or/3.
:- linear f_merge/3.

% destructor: f(E, (Bit, DerivativeA, DerivativeB)), derivatives as alternation lists
empty @ f([], R) <=> R = (0, [], []).
eps @ f(1, R) <=> R = (1, [], []).
char_a @ f(a, R) <=> R = (0, [1], []).
char_b @ f(b, R) <=> R = (0, [], [1]).
alt @ f([E | L], R) <=> R = (T, A, B), f(E, (Et, Ea, Eb)), f(L, (Lt, La, Lb)),
    f_or(Et, Lt, T), f_merge(Ea, La, A), f_merge(Eb, Lb, B).
star @ f(star(E), R) <=> R = (1, [(Ea, [star(E)])], [(Eb, [star(E)])]), f(E, (_, Ea, Eb)).
plus @ f(plus(K), R) <=> R = (T, [Ka, (Ka, plus(K))], [Kb, (Kb, plus(K))]), f(K, (T, Ka, Kb)).
conc @ f((E, F), R) <=> f(E, (Et, Ea, Eb)), f_conc(Et, Ea, Eb, F, R).
conc_0 @ f_conc(0, Ea, Eb, F, R) <=> R = (0, [(Ea, F)], [(Eb, F)]).
conc_1 @ f_conc(1, Ea, Eb, F, R) <=> R = (T, A, B), f(F, (T, Fa, Fb)),
    f_merge([(Ea, F)], Fa, A), f_merge([(Eb, F)], Fb, B).

% or/3 and merge/3 wait until their inputs are computed
or_ready @ f_or(X, Y, Z) <=> ground(X), ground(Y) | or(X, Y, Z).
merge_ready @ f_merge(X, Y, Z) <=> ground(X), ground(Y) | merge(X, Y, Z).

bisim @ 4 :: L ~ K ==> nonvar(L), nonvar(K) | f(L, (T, La, Lb)), f(K, (T, Ka, Kb)), La ~ Ka, Lb ~ Kb.
"""


class Verdict(str, Enum):
    EQUAL = "EQUAL"
    NOT_EQUAL = "NOT-EQUAL"
    LIMIT = "LIMIT"


@dataclass(frozen=True)
class CheckResult:
    verdict: Verdict
    derivation: DerivationResult


_VERDICTS = {
    DerivationStatus.SUCCESS: Verdict.EQUAL,
    DerivationStatus.FAILED: Verdict.NOT_EQUAL,
    DerivationStatus.STEP_LIMIT: Verdict.LIMIT,
}


# automata


@dataclass(frozen=True)
class Automaton:
    states: Tuple[str, ...]
    dest: Dict[str, Tuple[int, str, str]]

    def __post_init__(self):
        for name, (bit, a_succ, b_succ) in self.dest.items():
            if bit not in (0, 1):
                raise ProgramError(f"State '{name}' has output bit {bit}, expected 0 or 1")
            for succ in (a_succ, b_succ):
                if succ not in self.dest:
                    raise ProgramError(f"State '{name}' has unknown successor '{succ}'")


def load_automaton(text: str) -> Automaton:
    """Read `<name> <bit> <a-successor> <b-successor>` lines; `#` starts a comment."""
    dest: Dict[str, Tuple[int, str, str]] = {}
    order: List[str] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 4:
            raise ChrParseError(f"Expected 4 fields, got {len(fields)}", number, 1)
        name, bit, a_succ, b_succ = fields
        if name in dest:
            raise ChrParseError(f"Duplicate state '{name}'", number, 1)
        if bit not in ("0", "1"):
            raise ChrParseError(f"Output bit of '{name}' must be 0 or 1, got {bit!r}", number, 1)
        dest[name] = (int(bit), a_succ, b_succ)
        order.append(name)
    for name, (_, a_succ, b_succ) in dest.items():
        for succ in (a_succ, b_succ):
            if succ not in dest:
                raise ChrParseError(f"State '{name}' has unknown successor '{succ}'")
    return Automaton(tuple(order), dest)


def state_variable(name: str) -> Variable:
    return Variable(f"State_{name}")


def automaton_to_constraints(automaton: Automaton) -> Tuple[ConstraintAtom, ...]:
    """One `f(State, (Bit, ASucc, BSucc))` atom per state, states as shared variables."""
    atoms = []
    for name in automaton.states:
        bit, a_succ, b_succ = automaton.dest[name]
        triple = Compound(TUPLE_FUNCTOR, (IntLit(bit), Compound(TUPLE_FUNCTOR, (state_variable(a_succ), state_variable(b_succ)))))
        atoms.append(ConstraintAtom("f", (state_variable(name), triple)))
    return tuple(atoms)


def bisim_program() -> Program:
    return parse_program(BISIM_PROGRAM)


def bisim_check(
    automaton: Automaton,
    s1: str,
    s2: str,
    n: int = DEFAULT_SCALE,
    step_limit: int = DEFAULT_STEP_LIMIT,
    trace: bool = False,
) -> CheckResult:
    """Decide whether two automaton states are bisimilar by a hybrid run of the scaled program.

    Raises:
        ProgramError: A state is not part of the automaton.
        DerivationError: The run stopped without success or failure.
    """
    for state in (s1, s2):
        if state not in automaton.dest:
            raise ProgramError(f"Unknown automaton state '{state}'")
    program = bisim_program()
    scaled = scalar_program(program, n)
    goal = scalar_goal(
        automaton_to_constraints(automaton) + (ConstraintAtom("~", (state_variable(s1), state_variable(s2))),), n
    )
    translated = translate(HybridProgram.of(scaled))
    query = translate_state(Query(goal), program.persistent_symbols, translated.control)
    result = run(query, translated.rules, step_limit=step_limit, trace=trace)
    if result.status not in (DerivationStatus.SUCCESS, DerivationStatus.FAILED):
        raise DerivationError(f"Bisimulation run ended with status {result.status.value}: {result.error or ''}")
    verdict = _VERDICTS[result.status]
    logger.info(f"bisim {s1} ~ {s2}: {verdict.value} after {result.steps} steps")
    return CheckResult(verdict, result)


def automata_equivalent(automaton: Automaton, s1: str, s2: str) -> bool:
    """Product-automaton search for a pair of states with different output bits."""
    seen = {(s1, s2)}
    stack = [(s1, s2)]
    while stack:
        left, right = stack.pop()
        l_bit, l_a, l_b = automaton.dest[left]
        r_bit, r_a, r_b = automaton.dest[right]
        if l_bit != r_bit:
            return False
        for pair in ((l_a, r_a), (l_b, r_b)):
            if pair not in seen:
                seen.add(pair)
                stack.append(pair)
    return True


# regular expressions


@dataclass(frozen=True)
class EmptyList:
    def __str__(self) -> str:
        return "[]"


@dataclass(frozen=True)
class Eps:
    def __str__(self) -> str:
        return "1"


@dataclass(frozen=True)
class Char:
    symbol: str

    def __str__(self) -> str:
        return self.symbol


@dataclass(frozen=True)
class Concat:
    left: "RegexExpr"
    right: "RegexExpr"

    def __str__(self) -> str:
        return f"({self.left},{self.right})"


@dataclass(frozen=True)
class Star:
    inner: "RegexExpr"

    def __str__(self) -> str:
        return f"{self.inner}*"


@dataclass(frozen=True)
class Plus:
    inner: "RegexExpr"

    def __str__(self) -> str:
        return f"{self.inner}+"


@dataclass(frozen=True)
class Alt:
    items: Tuple["RegexExpr", ...]

    def __str__(self) -> str:
        return "[" + ",".join(str(item) for item in self.items) + "]"


RegexExpr = Union[EmptyList, Eps, Char, Concat, Star, Plus, Alt]

EMPTY = EmptyList()
EPS = Eps()


REGEX_GRAMMAR = r"""
    ?start: expr
    ?expr: postfix
         | postfix "," expr -> concat
    ?postfix: primary
            | postfix "*" -> star
            | postfix "+" -> plus
    ?primary: "[" "]" -> empty
            | "[" items "]" -> alt
            | "1" -> eps
            | CHAR -> char
            | "(" expr ")"
    items: postfix ("," postfix)*

    CHAR: "a" | "b"

    %import common.WS
    %ignore WS
"""

_regex_parser = Lark(REGEX_GRAMMAR, parser="lalr")


class _RegexTransformer(Transformer):
    def concat(self, children):
        return Concat(children[0], children[1])

    def star(self, children):
        return Star(children[0])

    def plus(self, children):
        return Plus(children[0])

    def empty(self, children):
        return EMPTY

    def alt(self, children):
        return Alt(tuple(children[0]))

    def eps(self, children):
        return EPS

    def char(self, children):
        return Char(str(children[0]))

    def items(self, children):
        return list(children)


def parse_regex(text: str) -> RegexExpr:
    try:
        return _RegexTransformer().transform(_regex_parser.parse(text))
    except UnexpectedInput as e:
        raise ChrParseError(f"Invalid regular expression {text!r}", e.line, e.column) from None
    except VisitError as e:
        raise e.orig_exc from None


def regex_to_term(e: RegexExpr) -> Term:
    if isinstance(e, EmptyList):
        return NIL
    if isinstance(e, Eps):
        return IntLit(1)
    if isinstance(e, Char):
        return Atom(e.symbol)
    if isinstance(e, Concat):
        return Compound(TUPLE_FUNCTOR, (regex_to_term(e.left), regex_to_term(e.right)))
    if isinstance(e, Star):
        return Compound("star", (regex_to_term(e.inner),))
    if isinstance(e, Plus):
        return Compound("plus", (regex_to_term(e.inner),))
    return make_list(regex_to_term(item) for item in e.items)


def term_to_regex(t: Term) -> RegexExpr:
    """Inverse of `regex_to_term`; raises ValueError on terms outside the encoding."""
    if isinstance(t, Atom) and t.name == NIL_NAME:
        return EMPTY
    if isinstance(t, IntLit) and t.value == 1:
        return EPS
    if isinstance(t, Atom) and t.name in ALPHABET:
        return Char(t.name)
    if isinstance(t, Compound):
        if t.functor == TUPLE_FUNCTOR and t.arity == 2:
            return Concat(term_to_regex(t.args[0]), term_to_regex(t.args[1]))
        if t.functor == "star" and t.arity == 1:
            return Star(term_to_regex(t.args[0]))
        if t.functor == "plus" and t.arity == 1:
            return Plus(term_to_regex(t.args[0]))
        if t.functor == CONS_FUNCTOR and t.arity == 2:
            items = []
            while isinstance(t, Compound) and t.functor == CONS_FUNCTOR and t.arity == 2:
                items.append(term_to_regex(t.args[0]))
                t = t.args[1]
            if t != NIL:
                raise ValueError(f"Open alternation list in {term_text(t)}")
            return Alt(tuple(items))
    raise ValueError(f"Term {term_text(t)} does not encode a regular expression")


@functools.lru_cache(maxsize=1)
def destructor_program() -> Program:
    return parse_program(DESTRUCTOR_PROGRAM)


@functools.lru_cache(maxsize=1)
def translated_destructor_program() -> TranslatedProgram:
    return translate(HybridProgram.of(destructor_program()))


def regex_equal(
    e1: RegexExpr,
    e2: RegexExpr,
    step_limit: int = DEFAULT_STEP_LIMIT,
    trace: bool = False,
) -> CheckResult:
    """Run `e1 ~ e2` under the translated destructor program."""
    program = destructor_program()
    translated = translated_destructor_program()
    goal = (ConstraintAtom("~", (regex_to_term(e1), regex_to_term(e2))),)
    query = translate_state(Query(goal), program.persistent_symbols, translated.control)
    result = run(query, translated.rules, step_limit=step_limit, trace=trace)
    if result.status is DerivationStatus.ERROR:
        raise DerivationError(f"Regular expression run aborted: {result.error}")
    verdict = _VERDICTS[result.status]
    logger.info(f"regex {e1} ~ {e2}: {verdict.value} after {result.steps} steps")
    return CheckResult(verdict, result)


def destruct(e: RegexExpr, step_limit: int = DEFAULT_STEP_LIMIT) -> Tuple[int, RegexExpr, RegexExpr]:
    """Output bit and both derivatives of `e`, computed by the destructor rules alone."""
    result_var = Variable("R")
    query = Query((ConstraintAtom("f", (regex_to_term(e), result_var)),))
    result = run(query, destructor_program(), step_limit=step_limit)
    if result.status is not DerivationStatus.SUCCESS or result.state.chr_store:
        raise DerivationError(f"Destructor did not reduce {e}: {result.status.value}")
    triple = result.state.builtins.resolve(result_var)
    bit, rest = triple.args
    a_derivative, b_derivative = rest.args
    return bit.value, term_to_regex(a_derivative), term_to_regex(b_derivative)


# direct oracle


def _alt(items) -> RegexExpr:
    flat = set()
    for item in items:
        if isinstance(item, Alt):
            flat.update(item.items)
        elif not isinstance(item, EmptyList):
            flat.add(item)
    if not flat:
        return EMPTY
    if len(flat) == 1:
        return next(iter(flat))
    return Alt(tuple(sorted(flat, key=str)))


def _concat(left: RegexExpr, right: RegexExpr) -> RegexExpr:
    if isinstance(left, EmptyList) or isinstance(right, EmptyList):
        return EMPTY
    if (isinstance(left, Alt) and not left.items) or (isinstance(right, Alt) and not right.items):
        return EMPTY
    if isinstance(left, Eps):
        return right
    if isinstance(right, Eps):
        return left
    return Concat(left, right)


def nullable(e: RegexExpr) -> bool:
    if isinstance(e, (Eps, Star)):
        return True
    if isinstance(e, (EmptyList, Char)):
        return False
    if isinstance(e, Concat):
        return nullable(e.left) and nullable(e.right)
    if isinstance(e, Plus):
        return nullable(e.inner)
    return any(nullable(item) for item in e.items)


@functools.lru_cache(maxsize=65536)
def derivative(e: RegexExpr, symbol: str) -> RegexExpr:
    if isinstance(e, (EmptyList, Eps)):
        return EMPTY
    if isinstance(e, Char):
        return EPS if e.symbol == symbol else EMPTY
    if isinstance(e, Concat):
        head = _concat(derivative(e.left, symbol), e.right)
        if nullable(e.left):
            return _alt([head, derivative(e.right, symbol)])
        return head
    if isinstance(e, Star):
        return _concat(derivative(e.inner, symbol), e)
    if isinstance(e, Plus):
        return _concat(derivative(e.inner, symbol), Star(e.inner))
    return _alt(derivative(item, symbol) for item in e.items)


def matches(e: RegexExpr, word: str) -> bool:
    for symbol in word:
        e = derivative(e, symbol)
    return nullable(e)


@dataclass(frozen=True)
class OracleResult:
    equal: bool
    witness: Optional[str] = None


def oracle_lang_equal(e1: RegexExpr, e2: RegexExpr, max_len: int = 12) -> OracleResult:
    """Compare the languages on every word over {a, b} up to `max_len`, shortest words first."""
    frontier = [("", _alt([e1]), _alt([e2]))]
    seen = {(frontier[0][1], frontier[0][2])}
    for length in itertools.count():
        next_frontier = []
        for word, d1, d2 in frontier:
            if nullable(d1) != nullable(d2):
                return OracleResult(False, word)
            if length == max_len:
                continue
            for symbol in ALPHABET:
                pair = (derivative(d1, symbol), derivative(d2, symbol))
                if pair not in seen:
                    seen.add(pair)
                    next_frontier.append((word + symbol, *pair))
        if not next_frontier:
            return OracleResult(True)
        frontier = next_frontier
