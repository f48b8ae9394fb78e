"""
Exceptions raised by the CHR engine and its checks.

Logical failure (a clash during unification, an inconsistent store, a failed
derivation) is never an exception; these classes cover malformed input,
misuse of built-ins and broken invariants.
"""

from typing import Optional


class ChrError(Exception):
    """Base class for every error raised by the engine."""


class ChrParseError(ChrError, ValueError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        location = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{location}")


class ProgramError(ChrError, ValueError):
    """Ill-formed rule or program, or a transformation used outside its precondition."""


class InstantiationError(ChrError):
    """A built-in was told with arguments that are not sufficiently instantiated."""


class GroundingError(ChrError):
    """The abstract enumerator reached a state that is not ground."""


class TruncatedSystemError(ChrError):
    """An exact fixpoint was requested on a transition system cut off by its bound."""


class InvariantViolation(ChrError, AssertionError):
    """The state validator found a broken invariant."""


class DerivationError(ChrError, RuntimeError):
    """A derivation ended in a status the caller cannot interpret as a verdict."""
