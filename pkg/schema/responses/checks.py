from enum import Enum
from typing import Annotated, Dict, List, Optional

from pydantic import BaseModel, Field


class RunStatus(str, Enum):
    SUCCESS = "success"
    FAILED = "failed"
    ERROR = "error"
    STEP_LIMIT = "step_limit"


class EquivalenceVerdict(str, Enum):
    EQUAL = "EQUAL"
    NOT_EQUAL = "NOT-EQUAL"
    LIMIT = "LIMIT"


class MembershipVerdict(str, Enum):
    MEMBER = "MEMBER"
    NON_MEMBER = "NON-MEMBER"
    NO_INCONSISTENCY_WITHIN_BOUND = "NO-INCONSISTENCY-WITHIN-BOUND"
    INCONCLUSIVE = "INCONCLUSIVE"


class RunResponse(BaseModel):
    status: Annotated[RunStatus, Field(description="How the derivation ended")]
    bindings: Annotated[List[str], Field(default_factory=list, description="Global variable bindings")]
    store: Annotated[List[str], Field(default_factory=list, description="Remaining CHR constraints, sorted")]
    steps: Annotated[int, Field(description="Number of transitions taken")]
    trace: Annotated[List[str], Field(default_factory=list, description="Trace lines, if requested")]
    error: Annotated[Optional[str], Field(default=None, description="Instantiation error message")]

    def text(self) -> str:
        if self.status is RunStatus.FAILED:
            return "false\n"
        lines = self.bindings + self.store
        if self.status is RunStatus.STEP_LIMIT:
            lines.append("% step limit reached")
        elif self.status is RunStatus.ERROR:
            lines.append(f"% error: {self.error}")
        return "".join(line + "\n" for line in lines) if lines else "true\n"


class TranslateResponse(BaseModel):
    program: Annotated[str, Field(description="Translated program in the CHR file grammar")]
    provenance: Annotated[
        Dict[str, str], Field(default_factory=dict, description="Generated rule name to source rule")
    ]


class LogicalResponse(BaseModel):
    readings: Annotated[List[str], Field(description="One formula per rule plus the state template")]


class MembershipResult(BaseModel):
    root: str
    verdict: MembershipVerdict


class FixpointResponse(BaseModel):
    mode: str
    results: List[MembershipResult]
    states: Annotated[int, Field(description="Number of explored states")]
    truncated: bool


class EquivalenceResponse(BaseModel):
    verdict: EquivalenceVerdict
    steps: int
    trace: Annotated[List[str], Field(default_factory=list, description="Trace lines, if requested")]


class HealthCheckResponse(BaseModel):
    status: str
    message: str
    version: str


class ErrorResponse(BaseModel):
    error: str
    details: str
    status_code: int
