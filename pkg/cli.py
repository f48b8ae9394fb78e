#!/usr/bin/env python3
"""
Command-line front end: run goals, translate hybrid programs, print logical
readings, decide fixpoint membership and run the two equivalence checks.

Exit codes: 0 success / equal / member, 1 failed / not-equal / non-member,
2 step limit / bounded / inconclusive, 3 usage or input error, 4 internal
invariant violation.
"""

import argparse
import logging
import sys
from typing import Optional, Sequence

from dotenv import load_dotenv
from pydantic import ValidationError

from models.errors import ChrError, DerivationError, InvariantViolation
from schema.config import CliConfig, setup_logging
from schema.requests.checks import BisimRequest, FixpointRequest, ProgramRequest, RegexEqualRequest, RunRequest
from schema.responses.checks import EquivalenceVerdict, MembershipVerdict, RunStatus
from services import checks

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_NEGATIVE, EXIT_BOUNDED, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3, 4

RUN_EXIT = {
    RunStatus.SUCCESS: EXIT_OK,
    RunStatus.FAILED: EXIT_NEGATIVE,
    RunStatus.STEP_LIMIT: EXIT_BOUNDED,
    RunStatus.ERROR: EXIT_USAGE,
}
EQUIVALENCE_EXIT = {
    EquivalenceVerdict.EQUAL: EXIT_OK,
    EquivalenceVerdict.NOT_EQUAL: EXIT_NEGATIVE,
    EquivalenceVerdict.LIMIT: EXIT_BOUNDED,
}
MEMBERSHIP_EXIT = {
    MembershipVerdict.MEMBER: EXIT_OK,
    MembershipVerdict.NON_MEMBER: EXIT_NEGATIVE,
    MembershipVerdict.NO_INCONSISTENCY_WITHIN_BOUND: EXIT_BOUNDED,
    MembershipVerdict.INCONCLUSIVE: EXIT_BOUNDED,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="chr", description="Constraint Handling Rules engine and semantic checks")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--step-limit", type=int, dest="step_limit", help="maximum derivation steps")
    common.add_argument("--bound", type=int, help="maximum states explored by fixpoint checks")
    common.add_argument("--scale", type=int, dest="n_scale", help="scaling factor for bisimulation goals")
    common.add_argument("--trace", action="store_true", help="stream the derivation trace to stderr")

    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    run = sub.add_parser("run", parents=[common], help="run a goal and print the final state")
    run.add_argument("program_path", metavar="PROGRAM")
    run.add_argument("goal", metavar="GOAL")
    run.add_argument("--validate", action="store_true", dest="validate_states", help="check state invariants")
    run.add_argument("--hybrid", action="store_true", help="run under the hybrid translation")

    translate = sub.add_parser("translate", parents=[common], help="print the translated hybrid program")
    translate.add_argument("program_path", metavar="PROGRAM")

    logical = sub.add_parser("logical", parents=[common], help="print the logical reading of every rule")
    logical.add_argument("program_path", metavar="PROGRAM")

    fix = sub.add_parser("fixpoint", parents=[common], help="decide fixpoint membership of ground roots")
    fix.add_argument("program_path", metavar="PROGRAM")
    fix.add_argument("--mode", choices=["lfp", "gfp", "hybrid"], default="lfp")
    fix.add_argument("--root", action="append", dest="roots", required=True, help="ground root goal (repeatable)")

    regex = sub.add_parser("regex-eq", parents=[common], help="decide equivalence of two regular expressions")
    regex.add_argument("left", metavar="E1")
    regex.add_argument("right", metavar="E2")

    bisim = sub.add_parser("bisim", parents=[common], help="decide bisimilarity of two automaton states")
    bisim.add_argument("automaton_path", metavar="AUTOMATON")
    bisim.add_argument("left", metavar="S1")
    bisim.add_argument("right", metavar="S2")
    return parser


def _config(args: argparse.Namespace) -> CliConfig:
    values = {key: value for key, value in vars(args).items() if value is not None}
    if "hybrid" in values:
        values.pop("hybrid")
    return CliConfig(**values)


def _execute(config: CliConfig, hybrid_run: bool, out, err) -> int:
    if config.subcommand == "run":
        response = checks.run_program(
            RunRequest(
                program=config.program_path.read_text(encoding="utf-8"),
                goal=config.goal,
                step_limit=config.step_limit,
                trace=config.trace,
                validate_states=config.validate_states,
                hybrid=hybrid_run,
            )
        )
        for line in response.trace:
            err.write(line + "\n")
        out.write(response.text())
        return RUN_EXIT[response.status]

    if config.subcommand == "translate":
        response = checks.translate_program(ProgramRequest(program=config.program_path.read_text(encoding="utf-8")))
        out.write(response.program)
        return EXIT_OK

    if config.subcommand == "logical":
        response = checks.logical_program(ProgramRequest(program=config.program_path.read_text(encoding="utf-8")))
        out.write("".join(line + "\n" for line in response.readings))
        return EXIT_OK

    if config.subcommand == "fixpoint":
        response = checks.check_fixpoint(
            FixpointRequest(
                program=config.program_path.read_text(encoding="utf-8"),
                roots=config.roots,
                mode=config.mode,
                bound=config.bound,
            )
        )
        for result in response.results:
            out.write(f"{result.root}\t{result.verdict.value}\n")
        return max(MEMBERSHIP_EXIT[result.verdict] for result in response.results)

    if config.subcommand == "regex-eq":
        response = checks.regex_equivalence(
            RegexEqualRequest(left=config.left, right=config.right, step_limit=config.step_limit, trace=config.trace)
        )
    else:
        response = checks.bisimulation(
            BisimRequest(
                automaton=config.automaton_path.read_text(encoding="utf-8"),
                left=config.left,
                right=config.right,
                scale=config.n_scale,
                step_limit=config.step_limit,
                trace=config.trace,
            )
        )
    for line in response.trace:
        err.write(line + "\n")
    out.write(response.verdict.value + "\n")
    return EQUIVALENCE_EXIT[response.verdict]


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    """Entry point; returns the process exit code."""
    out = out or sys.stdout
    err = err or sys.stderr
    load_dotenv()
    setup_logging(err)
    try:
        args = build_parser().parse_args(argv)
        hybrid_run = bool(getattr(args, "hybrid", False))
        config = _config(args)
        return _execute(config, hybrid_run, out, err)
    except _UsageError as e:
        err.write(f"usage error: {e}\n")
        return EXIT_USAGE
    except ValidationError as e:
        err.write(f"invalid options: {e}\n")
        return EXIT_USAGE
    except InvariantViolation as e:
        logger.error(f"Invariant violation: {e}")
        err.write(f"internal error: {e}\n")
        return EXIT_INTERNAL
    except DerivationError as e:
        err.write(f"{e}\n")
        return EXIT_BOUNDED
    except ChrError as e:
        err.write(f"error: {e}\n")
        return EXIT_USAGE
    except OSError as e:
        err.write(f"error: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
