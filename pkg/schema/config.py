import logging
import os
import sys
from pathlib import Path
from typing import Annotated, List, Literal, Optional

from pydantic import BaseModel, Field

Subcommand = Literal["run", "translate", "fixpoint", "regex-eq", "bisim", "logical"]
FixpointMode = Literal["lfp", "gfp", "hybrid"]

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def _env_int(name: str, default: int) -> int:
    return int(os.getenv(name, default))


class CliConfig(BaseModel):
    """Validated options of one command-line invocation."""

    subcommand: Annotated[Subcommand, Field(..., description="Action to perform")]
    step_limit: Annotated[
        int,
        Field(
            default_factory=lambda: _env_int("CHR_STEP_LIMIT", 100_000),
            gt=0,
            description="Maximum number of derivation steps",
        ),
    ]
    bound: Annotated[
        int,
        Field(
            default_factory=lambda: _env_int("CHR_BOUND", 10_000),
            gt=0,
            description="Maximum number of states explored by the fixpoint checks",
        ),
    ]
    n_scale: Annotated[
        int,
        Field(
            default_factory=lambda: _env_int("CHR_SCALE", 3),
            gt=0,
            description="Scaling factor for the bisimulation goal",
        ),
    ]
    trace: Annotated[bool, Field(default=False, description="Stream the derivation trace to stderr")]
    validate_states: Annotated[bool, Field(default=False, description="Check state invariants after every step")]
    mode: Annotated[FixpointMode, Field(default="lfp", description="Fixpoint semantics")]
    program_path: Annotated[Optional[Path], Field(default=None, description="CHR program file")]
    automaton_path: Annotated[Optional[Path], Field(default=None, description="Automaton file")]
    goal: Annotated[Optional[str], Field(default=None, description="Goal text")]
    roots: Annotated[List[str], Field(default_factory=list, description="Fixpoint roots")]
    left: Annotated[Optional[str], Field(default=None, description="Left expression or state")]
    right: Annotated[Optional[str], Field(default=None, description="Right expression or state")]


def setup_logging(stream=None) -> logging.Logger:
    """Configure root logging from LOG_LEVEL / LOG_FILE; records go to stderr by default."""
    log_level = os.getenv("LOG_LEVEL", "WARNING").upper()
    handlers: List[logging.Handler] = [logging.StreamHandler(stream or sys.stderr)]
    log_file = os.getenv("LOG_FILE")
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=getattr(logging, log_level, logging.WARNING),
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )

    logger = logging.getLogger(__name__)
    logger.debug(f"Logging configured with level: {log_level}")
    return logger
