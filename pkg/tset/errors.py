from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence


@dataclass(frozen=True)
class Loc:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


class TSetError(Exception):
    """Root of every error raised by the tset package."""


class ParseError(TSetError):
    def __init__(self, message: str, line: int = 0, col: int = 0, expected: Sequence[str] = ()):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col
        self.expected = tuple(expected)

    def __str__(self) -> str:
        s = f"syntax error: {self.message} at {self.line}:{self.col}"
        if self.expected:
            s += f" (expected one of: {', '.join(self.expected)})"
        return s


class DuplicateDirective(ParseError):
    pass


class HeadNotLinear(ParseError):
    pass


class ErrorKind(str, Enum):
    CONSTRAINT_MISMATCH = "ConstraintMismatch"
    UNDECLARED_VARIABLE = "UndeclaredVariable"
    DUPLICATE_DEC = "DuplicateDec"
    ENUM_VIOLATION = "EnumViolation"
    ATOM_WITHOUT_ENUM = "AtomWithoutEnum"
    POLY_INSTANTIATION_FAILURE = "PolyInstantiationFailure"
    ILL_FORMED_DIRECTIVE = "IllFormedDirective"
    MISSING_DIRECTIVE = "MissingDirective"
    UNKNOWN_PREDICATE = "UnknownPredicate"


# Kinds whose message is already the complete `type error in c: ...` line.
_TEMPLATED = {ErrorKind.CONSTRAINT_MISMATCH, ErrorKind.POLY_INSTANTIATION_FAILURE}


class TypeCheckError(TSetError):
    def __init__(self, kind: ErrorKind, message: str, loc: Optional[Loc] = None, *, templated: bool = False):
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.loc = loc
        self.templated = templated and kind in _TEMPLATED

    def __str__(self) -> str:
        if self.templated:
            return self.message
        if self.loc is not None:
            return f"type error: {self.message} at {self.loc}"
        return f"type error: {self.message}"


class ConsultError(TSetError):
    """All errors found while consulting one program; the store is left untouched."""

    def __init__(self, errors: Sequence[TSetError]):
        super().__init__(f"{len(errors)} error(s) while consulting")
        self.errors = list(errors)

    def __str__(self) -> str:
        return "\n".join(str(e) for e in self.errors)


class NameCollision(TSetError):
    pass


class UnknownPredicate(TSetError):
    pass


class BudgetExhausted(TSetError):
    def __init__(self, steps: int, answers: int = 0):
        super().__init__(f"step budget exhausted after {steps} steps")
        self.steps = steps
        self.answers = answers


class NoRuleApplies(TSetError):
    pass


class NotDerived(TSetError):
    pass


class ExplosionGuard(TSetError):
    def __init__(self, size: int, limit: int, what: str = "valuation space"):
        super().__init__(f"{what} of {size} exceeds the limit of {limit}")
        self.size = size
        self.limit = limit


class UnboundVariable(TSetError):
    pass


class UsageError(TSetError):
    pass
