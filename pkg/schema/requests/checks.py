from typing import Annotated, List, Literal

from pydantic import BaseModel, Field, field_validator


def _step_limit_field():
    return Field(default=100_000, gt=0, description="Maximum number of derivation steps")


class ProgramRequest(BaseModel):
    """A program in the CHR file grammar."""

    program: Annotated[str, Field(..., min_length=1, description="Program source text")]

    @field_validator("program")
    def validate_program(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("Program cannot be empty")
        return v


class RunRequest(ProgramRequest):
    goal: Annotated[str, Field(..., description="Goal, e.g. 'a, a, a' or 'q(0)'")]
    step_limit: Annotated[int, _step_limit_field()]
    trace: Annotated[bool, Field(default=False, description="Return the derivation trace")]
    validate_states: Annotated[bool, Field(default=False, description="Check state invariants after every step")]
    hybrid: Annotated[bool, Field(default=False, description="Run under the hybrid translation")]


class FixpointRequest(ProgramRequest):
    roots: Annotated[List[str], Field(..., min_length=1, description="Ground root goals")]
    mode: Annotated[Literal["lfp", "gfp", "hybrid"], Field(default="lfp")]
    bound: Annotated[int, Field(default=10_000, gt=0, description="Maximum number of explored states")]


class RegexEqualRequest(BaseModel):
    left: Annotated[str, Field(..., min_length=1, description="Left regular expression")]
    right: Annotated[str, Field(..., min_length=1, description="Right regular expression")]
    step_limit: Annotated[int, _step_limit_field()]
    trace: Annotated[bool, Field(default=False, description="Return the derivation trace")]


class BisimRequest(BaseModel):
    automaton: Annotated[str, Field(..., min_length=1, description="Automaton in the line format")]
    left: Annotated[str, Field(..., min_length=1, description="First state")]
    right: Annotated[str, Field(..., min_length=1, description="Second state")]
    scale: Annotated[int, Field(default=3, gt=0, description="Scaling factor of the goal")]
    step_limit: Annotated[int, _step_limit_field()]
    trace: Annotated[bool, Field(default=False, description="Return the derivation trace")]

    @field_validator("left", "right")
    def validate_state(cls, v: str) -> str:
        return v.strip()
