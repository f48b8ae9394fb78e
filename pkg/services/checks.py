import logging
from typing import Dict, Iterable, List, Sequence, Tuple

from models.program import ConstraintAtom, Program, Query
from models.state import DerivationResult
from models.term import Compound, Term, Variable
from schema.requests.checks import BisimRequest, FixpointRequest, ProgramRequest, RegexEqualRequest, RunRequest
from schema.responses.checks import (
    EquivalenceResponse,
    EquivalenceVerdict,
    FixpointResponse,
    LogicalResponse,
    MembershipResult,
    MembershipVerdict,
    RunResponse,
    RunStatus,
    TranslateResponse,
)
from services import coind, fixpoint, hybrid
from services.engine import run
from services.lang import atom_text, logical_reading, parse_goal, parse_program, program_text, term_text
from services.store import BuiltinStore
from services.term import term_key

logger = logging.getLogger(__name__)

CONFLUENCE_WARNING = "Hybrid verdicts assume the simplification rules of the program are confluent"


def _shape_key(t: Term):
    """Ordering key that ignores variable names."""
    if isinstance(t, Variable):
        return (2, "")
    if isinstance(t, Compound):
        return (3, len(t.args), t.functor, tuple(_shape_key(arg) for arg in t.args))
    return term_key(t)


def _rename(t: Term, names: Dict[Variable, Variable]) -> Term:
    if isinstance(t, Variable):
        if t not in names:
            names[t] = Variable(f"_V{len(names) + 1}")
        return names[t]
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(_rename(arg, names) for arg in t.args))
    return t


def final_state_lines(result: DerivationResult) -> Tuple[List[str], List[str]]:
    """Global bindings, then the remaining store sorted; unbound variables renumbered in order of appearance."""
    state = result.state
    store: BuiltinStore = state.builtins
    names: Dict[Variable, Variable] = {var: var for var in state.globals}
    bindings = []
    for var in sorted(state.globals, key=lambda v: v.name):
        value = store.resolve(var)
        if value != var:
            bindings.append(f"{var.name} = {term_text(_rename(value, names))}")
    atoms = [store.resolve(item.constraint.to_term()) for item in state.chr_store]
    atoms.sort(key=_shape_key)
    lines = [atom_text(ConstraintAtom.from_term(_rename(t, names))) for t in atoms]
    return bindings, lines


def _query(program: Program, goal_text: str, use_hybrid: bool) -> Tuple[Program, Query]:
    query = Query(parse_goal(goal_text))
    if not use_hybrid:
        return program, query
    logger.warning(CONFLUENCE_WARNING)
    translated = hybrid.translate(hybrid.HybridProgram.of(program))
    return translated.rules, hybrid.translate_state(query, program.persistent_symbols, translated.control)


def run_program(request: RunRequest) -> RunResponse:
    """
    Run a goal against a program and report the final state

    Args:
        request: RunRequest with program text, goal and limits

    Returns:
        RunResponse with status, bindings, store and optional trace

    Raises:
        ChrParseError: If the program or goal does not parse
        ProgramError: If the program is ill-formed
        InvariantViolation: If state validation is on and an invariant breaks
    """
    try:
        program = parse_program(request.program)
        executable, query = _query(program, request.goal, request.hybrid)
        result = run(
            query,
            executable,
            step_limit=request.step_limit,
            trace=request.trace,
            validate=request.validate_states,
        )
        logger.info(f"Run finished with status {result.status.value} after {result.steps} steps")
        bindings, store = final_state_lines(result)
        return RunResponse(
            status=RunStatus(result.status.value),
            bindings=bindings,
            store=store,
            steps=result.steps,
            trace=[entry.line() for entry in result.trace],
            error=result.error,
        )
    except Exception as e:
        logger.error(f"Error in run service: {str(e)}")
        raise


def translate_program(request: ProgramRequest) -> TranslateResponse:
    program = parse_program(request.program)
    translated = hybrid.translate(hybrid.HybridProgram.of(program))
    provenance = {
        name: source + (f" via {', '.join(chain)}" if chain else "")
        for name, (source, chain) in translated.provenance.items()
    }
    return TranslateResponse(program=program_text(translated.rules), provenance=provenance)


def logical_program(request: ProgramRequest) -> LogicalResponse:
    program = parse_program(request.program)
    return LogicalResponse(readings=logical_reading(program).splitlines())


def _memberships(roots: Sequence[str], states: Iterable, verdict_of) -> List[MembershipResult]:
    return [MembershipResult(root=text, verdict=verdict_of(state)) for text, state in zip(roots, states)]


def check_fixpoint(request: FixpointRequest) -> FixpointResponse:
    """
    Decide fixpoint membership of every root

    Args:
        request: FixpointRequest with program, roots, mode and bound

    Returns:
        FixpointResponse with one verdict per root

    Raises:
        GroundingError: If a root or a reachable state is not ground
    """
    program = parse_program(request.program)
    contraction = request.mode == "hybrid"
    roots = [fixpoint.canon_root(parse_goal(text), program, contraction) for text in request.roots]

    if request.mode == "lfp":
        ts = fixpoint.enumerate_system(program, roots, request.bound)
        if ts.truncated:
            results = _memberships(request.roots, roots, lambda _: MembershipVerdict.INCONCLUSIVE)
        else:
            members = fixpoint.lfp_csr(ts)
            results = _memberships(
                request.roots,
                roots,
                lambda s: MembershipVerdict.MEMBER if s in members else MembershipVerdict.NON_MEMBER,
            )
    elif request.mode == "gfp":
        ts = fixpoint.enumerate_system(program, roots, request.bound)
        answer = fixpoint.gfp_cpr(ts)
        if isinstance(answer, dict):
            bounded = {
                fixpoint.BoundedVerdict.INCONSISTENT_REACHABLE: MembershipVerdict.NON_MEMBER,
                fixpoint.BoundedVerdict.NO_INCONSISTENCY_WITHIN_BOUND: MembershipVerdict.NO_INCONSISTENCY_WITHIN_BOUND,
            }
            results = _memberships(request.roots, roots, lambda s: bounded[answer[s]])
        else:
            results = _memberships(
                request.roots,
                roots,
                lambda s: MembershipVerdict.MEMBER if s in answer else MembershipVerdict.NON_MEMBER,
            )
    else:
        logger.warning(CONFLUENCE_WARNING)
        ts, simpl = fixpoint.hybrid_systems(hybrid.HybridProgram.of(program), roots, request.bound)
        if ts.truncated or simpl.truncated:
            results = _memberships(request.roots, roots, lambda _: MembershipVerdict.INCONCLUSIVE)
        else:
            members = fixpoint.hybrid_nested(ts, simpl)
            results = _memberships(
                request.roots,
                roots,
                lambda s: MembershipVerdict.MEMBER if s in members else MembershipVerdict.NON_MEMBER,
            )

    logger.info(f"Fixpoint check ({request.mode}) explored {len(ts.states)} states")
    return FixpointResponse(mode=request.mode, results=results, states=len(ts.states), truncated=ts.truncated)


def _equivalence_response(result: coind.CheckResult) -> EquivalenceResponse:
    return EquivalenceResponse(
        verdict=EquivalenceVerdict(result.verdict.value),
        steps=result.derivation.steps,
        trace=[entry.line() for entry in result.derivation.trace],
    )


def regex_equivalence(request: RegexEqualRequest) -> EquivalenceResponse:
    left = coind.parse_regex(request.left)
    right = coind.parse_regex(request.right)
    result = coind.regex_equal(left, right, step_limit=request.step_limit, trace=request.trace)
    return _equivalence_response(result)


def bisimulation(request: BisimRequest) -> EquivalenceResponse:
    automaton = coind.load_automaton(request.automaton)
    result = coind.bisim_check(
        automaton, request.left, request.right, n=request.scale, step_limit=request.step_limit, trace=request.trace
    )
    return _equivalence_response(result)
