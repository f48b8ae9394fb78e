"""
CHR surface language: program and goal parser, pretty-printer, hybrid-syntax
validator, declarative (logical) reading and the scalar-product transform
used by the coinductive completeness check.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedInput, VisitError

from models.errors import ChrParseError, ProgramError
from models.program import (
    GUARD_ONLY_SYMBOLS,
    PROPAGATION_PRIORITY,
    RESERVED_SYMBOLS,
    SIMPLIFICATION_PRIORITY,
    TRUE,
    ConstraintAtom,
    Program,
    Query,
    Rule,
)
from models.term import (
    CONS_FUNCTOR,
    NIL,
    NIL_NAME,
    TUPLE_FUNCTOR,
    Atom,
    Compound,
    IntLit,
    Term,
    Variable,
    make_list,
    make_tuple,
)

logger = logging.getLogger(__name__)

CHR_GRAMMAR = r"""
    program: item*
    ?item: directive | rule

    directive: ":-" NAME functor_name "/" INT "."
    functor_name: NAME | REL | ADDOP

    rule: rule_name? priority? heads? ARROW guard? body "."
    rule_name: NAME "@"
    priority: INT "::"
    heads: atoms BACKSLASH atoms -> simpagation_heads
         | atoms                 -> plain_heads
    guard: atoms "|"
    body: atoms

    goal: atoms? "."?
    term: expr

    atoms: expr ("," expr)*

    ?expr: sum
         | sum REL sum -> infix
    ?sum: primary
        | sum ADDOP primary -> infix
    ?primary: VAR -> var
            | INT -> int
            | NAME -> atom
            | NAME "(" args ")" -> compound
            | "[" "]" -> nil
            | "[" args "]" -> proper_list
            | "[" args "|" expr "]" -> partial_list
            | "(" args ")" -> paren
    args: expr ("," expr)*

    ARROW: "<=>" | "==>"
    REL: "=" | "<" | "~"
    ADDOP: "+" | "-"
    BACKSLASH: "\\"
    VAR: /[A-Z_][A-Za-z0-9_]*/
    NAME: /[a-z][A-Za-z0-9_]*/
    INT: /[0-9]+/
    COMMENT: /%[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

INFIX_PRECEDENCE = {"=": 700, "<": 700, "~": 700, "+": 500, "-": 500}

_parser = Lark(CHR_GRAMMAR, start=["program", "goal", "term"], parser="lalr", propagate_positions=True)


@dataclass(frozen=True)
class HybridViolation:
    rule: str
    reason: str


@dataclass
class _RuleDraft:
    name: Optional[str]
    priority: Optional[int]
    kept: Tuple[ConstraintAtom, ...]
    removed: Tuple[ConstraintAtom, ...]
    guard: Tuple[ConstraintAtom, ...]
    body: Tuple[ConstraintAtom, ...]
    line: Optional[int]
    column: Optional[int]


def _callable(t: Term) -> ConstraintAtom:
    if isinstance(t, (Variable, IntLit)):
        raise ProgramError(f"'{term_text(t)}' is not a constraint")
    return ConstraintAtom.from_term(t)


class _ChrTransformer(Transformer):
    def __init__(self):
        super().__init__()
        self._anonymous = itertools.count(1)

    # terms
    def var(self, children):
        (token,) = children
        if str(token) == "_":
            return Variable(f"_Anon{next(self._anonymous)}")
        return Variable(str(token))

    def int(self, children):
        return IntLit(int(children[0]))

    def atom(self, children):
        return Atom(str(children[0]))

    def compound(self, children):
        name, args = children
        return Compound(str(name), tuple(args))

    def nil(self, children):
        return NIL

    def proper_list(self, children):
        return make_list(children[0])

    def partial_list(self, children):
        items, tail = children
        return make_list(items, tail)

    def paren(self, children):
        return make_tuple(*children[0])

    def infix(self, children):
        left, op, right = children
        return Compound(str(op), (left, right))

    def args(self, children):
        return list(children)

    def term(self, children):
        return children[0]

    # constraints
    def atoms(self, children):
        return tuple(_callable(t) for t in children)

    def goal(self, children):
        return children[0] if children else ()

    def rule_name(self, children):
        return ("name", str(children[0]))

    def priority(self, children):
        return ("priority", int(children[0]))

    def plain_heads(self, children):
        return ("heads", None, children[0])

    def simpagation_heads(self, children):
        kept, _, removed = children
        return ("heads", kept, removed)

    def guard(self, children):
        return ("guard", children[0])

    def body(self, children):
        return ("body", children[0])

    def functor_name(self, children):
        return str(children[0])

    def directive(self, children):
        kind, functor, arity = children
        kind = str(kind)
        if kind not in ("persistent", "linear"):
            raise ProgramError(f"Unknown directive ':- {kind}'")
        return ("directive", kind, (functor, int(arity)))

    @v_args(meta=True)
    def rule(self, meta, children):
        parts = {}
        arrow = None
        for child in children:
            if isinstance(child, Token) and child.type == "ARROW":
                arrow = str(child)
            else:
                parts[child[0]] = child[1:]
        line = getattr(meta, "line", None)
        column = getattr(meta, "column", None)
        if "heads" not in parts:
            raise ChrParseError("Rule with both heads empty", line, column)
        kept, heads = parts["heads"]
        if arrow == "==>":
            if kept is not None:
                raise ChrParseError("Propagation rule cannot have a removed head", line, column)
            kept, removed = heads, ()
        else:
            kept, removed = (kept or ()), heads
        guard = parts.get("guard", ((TRUE,),))[0]
        return _RuleDraft(
            name=parts.get("name", (None,))[0],
            priority=parts.get("priority", (None,))[0],
            kept=kept,
            removed=removed,
            guard=guard,
            body=parts["body"][0],
            line=line,
            column=column,
        )

    def program(self, children):
        persistent, linear = set(), set()
        drafts = []
        for child in children:
            if isinstance(child, _RuleDraft):
                drafts.append(child)
            else:
                _, kind, symbol = child
                (persistent if kind == "persistent" else linear).add(symbol)
        clash = persistent & linear
        if clash:
            raise ProgramError(f"Symbols declared both persistent and linear: {sorted(clash)}")
        rules = [_finish_rule(draft, index) for index, draft in enumerate(drafts, start=1)]
        seen: Dict[str, int] = {}
        for rule, draft in zip(rules, drafts):
            if rule.name in seen:
                raise ChrParseError(f"Duplicate rule name '{rule.name}'", draft.line, draft.column)
            seen[rule.name] = 1
        return Program(tuple(rules), frozenset(persistent), frozenset(linear))


def _finish_rule(draft: _RuleDraft, index: int) -> Rule:
    where = (draft.line, draft.column)
    for atom in draft.kept + draft.removed:
        if atom.is_builtin:
            raise ChrParseError(f"Built-in '{atom.functor}/{atom.arity}' in rule head", *where)
    for atom in draft.guard:
        if not atom.is_builtin:
            raise ChrParseError(f"User constraint '{atom.functor}/{atom.arity}' in guard", *where)
    for atom in draft.body:
        if atom.symbol in GUARD_ONLY_SYMBOLS:
            raise ChrParseError(f"'{atom.functor}/{atom.arity}' may only appear in a guard", *where)
    propagation = not draft.removed
    default_priority = PROPAGATION_PRIORITY if propagation else SIMPLIFICATION_PRIORITY
    return Rule(
        name=draft.name or f"rule_{index}",
        priority=draft.priority if draft.priority is not None else default_priority,
        kept=draft.kept,
        removed=draft.removed,
        guard=draft.guard,
        body=draft.body,
    )


def _parse(text: str, start: str):
    try:
        tree = _parser.parse(text, start=start)
        return _ChrTransformer().transform(tree)
    except UnexpectedInput as e:
        raise ChrParseError(f"Syntax error near {str(getattr(e, 'token', '') or '')!r}", e.line, e.column) from None
    except VisitError as e:
        raise e.orig_exc from None


def parse_program(text: str, hybrid: bool = False) -> Program:
    """Parse a program file.

    Args:
        text: Program source in the CHR file grammar.
        hybrid: Reject the symbols reserved by the persistent-constraint
            translation.

    Returns:
        The parsed Program with default names, priorities and guards applied.

    Raises:
        ChrParseError: Syntax errors, empty heads, duplicate rule names.
        ProgramError: Reserved symbols in hybrid mode, conflicting declarations.
    """
    program = _parse(text, "program")
    if hybrid:
        used = sorted(program.user_symbols() & RESERVED_SYMBOLS)
        if used:
            names = ", ".join(f"{f}/{n}" for f, n in used)
            raise ProgramError(f"Reserved symbols used in a hybrid program: {names}")
    logger.debug(f"Parsed program with {len(program.rules)} rules")
    return program


def parse_goal(text: str) -> Tuple[ConstraintAtom, ...]:
    return _parse(text, "goal")


def parse_query(text: str) -> Query:
    return Query(parse_goal(text))


def parse_term(text: str) -> Term:
    return _parse(text, "term")


# printing


def term_text(t: Term, precedence: int = 999) -> str:
    if isinstance(t, Variable):
        return t.name
    if isinstance(t, IntLit):
        return str(t.value)
    if isinstance(t, Atom):
        return t.name
    if t.functor == CONS_FUNCTOR and len(t.args) == 2:
        return _list_text(t)
    if t.functor == TUPLE_FUNCTOR and len(t.args) == 2:
        items = [t.args[0]]
        rest = t.args[1]
        while isinstance(rest, Compound) and rest.functor == TUPLE_FUNCTOR and len(rest.args) == 2:
            items.append(rest.args[0])
            rest = rest.args[1]
        items.append(rest)
        return "(" + ", ".join(_arg_text(item) for item in items) + ")"
    if t.functor in INFIX_PRECEDENCE and len(t.args) == 2:
        own = INFIX_PRECEDENCE[t.functor]
        left_limit = own if own == 500 else own - 1
        text = f"{term_text(t.args[0], left_limit)} {t.functor} {term_text(t.args[1], own - 1)}"
        return f"({text})" if own > precedence else text
    return f"{t.functor}(" + ", ".join(_arg_text(arg) for arg in t.args) + ")"


def _arg_text(t: Term) -> str:
    # a bare comma term inside an argument list must keep its own parentheses
    return term_text(t, 999)


def _list_text(t: Term) -> str:
    items = []
    current = t
    while isinstance(current, Compound) and current.functor == CONS_FUNCTOR and len(current.args) == 2:
        items.append(_arg_text(current.args[0]))
        current = current.args[1]
    if isinstance(current, Atom) and current.name == NIL_NAME:
        return "[" + ", ".join(items) + "]"
    return "[" + ", ".join(items) + " | " + term_text(current) + "]"


def atom_text(atom: ConstraintAtom) -> str:
    return term_text(atom.to_term())


def atoms_text(atoms: Iterable[ConstraintAtom]) -> str:
    return ", ".join(atom_text(atom) for atom in atoms)


def rule_text(rule: Rule) -> str:
    if rule.is_propagation:
        heads, arrow = atoms_text(rule.kept), "==>"
    elif rule.kept:
        heads, arrow = f"{atoms_text(rule.kept)} \\ {atoms_text(rule.removed)}", "<=>"
    else:
        heads, arrow = atoms_text(rule.removed), "<=>"
    guard = ""
    if rule.guard and tuple(rule.guard) != (TRUE,):
        guard = f"{atoms_text(rule.guard)} | "
    body = atoms_text(rule.body) if rule.body else "true"
    return f"{rule.name} @ {rule.priority} :: {heads} {arrow} {guard}{body}."


def program_text(program: Program) -> str:
    lines = []
    for kind, symbols in (("persistent", program.persistent_symbols), ("linear", program.linear_symbols)):
        for functor, arity in sorted(symbols):
            lines.append(f":- {kind} {functor}/{arity}.")
    lines.extend(rule_text(rule) for rule in program.rules)
    return "\n".join(lines) + "\n"


# static checks and transforms


def validate_hybrid(program: Program) -> List[HybridViolation]:
    """Check the hybrid syntax: persistent kept heads, linear removed heads.

    An empty list means the program is hybrid.
    """
    violations = []
    for rule in program.rules:
        for atom in rule.kept:
            if not program.is_persistent(atom):
                violations.append(
                    HybridViolation(rule.name, f"kept head constraint '{atom_text(atom)}' is linear")
                )
        for atom in rule.removed:
            if program.is_persistent(atom):
                violations.append(
                    HybridViolation(rule.name, f"removed head constraint '{atom_text(atom)}' is persistent")
                )
    return violations


def _conjunction(atoms: Sequence[ConstraintAtom]) -> Tuple[str, int]:
    parts = [atom_text(atom) for atom in atoms if atom != TRUE]
    if not parts:
        return "true", 1
    return " ∧ ".join(parts), len(parts)


def _wrapped(atoms: Sequence[ConstraintAtom]) -> str:
    text, count = _conjunction(atoms)
    return f"({text})" if count > 1 else text


def rule_reading(rule: Rule) -> str:
    """The first-order reading ∀((K ∧ G) → (H ↔ ∃lv(G ∧ C ∧ B))) of one rule."""
    antecedent = [atom for atom in rule.kept + rule.guard if atom != TRUE]
    consequent_text, count = _conjunction(rule.guard + rule.body)
    local = rule.local_variables()
    if local:
        names = ",".join(v.name for v in local)
        consequent = f"∃{names}({consequent_text})"
    else:
        consequent = f"({consequent_text})" if count > 1 else consequent_text
    if rule.is_propagation:
        inner = f"{_wrapped(antecedent)} → {consequent}"
    else:
        equivalence = f"{_wrapped(rule.removed)} ↔ {consequent}"
        inner = f"{_wrapped(antecedent)} → ({equivalence})" if antecedent else equivalence
    return f"∀({inner})"


STATE_READING = "state ⟨C | E | X⟩: ∃₋X(C ∧ E)"


def logical_reading(program: Program) -> str:
    lines = [f"{rule.name}: {rule_reading(rule)}" for rule in program.rules]
    lines.append(STATE_READING)
    return "\n".join(lines) + "\n"


def _scale(atoms: Iterable[ConstraintAtom], n: int) -> Tuple[ConstraintAtom, ...]:
    scaled = []
    for atom in atoms:
        scaled.extend([atom] if atom.is_builtin else [atom] * n)
    return tuple(scaled)


def scalar_program(program: Program, n: int) -> Program:
    """Pⁿ: every user constraint of every body repeated n times.

    Raises:
        ProgramError: `program` has a simplification rule, or `n` < 1.
    """
    if n < 1:
        raise ProgramError(f"Scaling factor must be positive, got {n}")
    simplifications = [rule.name for rule in program.simplification_rules]
    if simplifications:
        raise ProgramError(f"Scalar product needs a pure propagation program; simplification rules: {simplifications}")
    rules = [
        Rule(
            name=f"{rule.name}_x{n}",
            priority=rule.priority,
            kept=rule.kept,
            removed=rule.removed,
            guard=rule.guard,
            body=_scale(rule.body, n),
        )
        for rule in program.rules
    ]
    return program.with_rules(rules)


def scalar_goal(goal: Iterable[ConstraintAtom], n: int) -> Tuple[ConstraintAtom, ...]:
    if n < 1:
        raise ProgramError(f"Scaling factor must be positive, got {n}")
    return _scale(goal, n)
