"""Diagnostics: the feedback unit produced by the parsers and the validator.

Every finding carries a stable code (``SYNnnn`` for syntax, ``SEMnnn`` for
semantic rules), a source span, a one-sentence message and an imperative fix
hint suitable for feeding back to an LLM or a human.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .spans import SourceSpan


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


# Stable code catalogue.  SYN codes come from the parsers, SEM codes from
# semantic checks (validator and FOL compiler).
SYN_CODES = {
    "SYN001": "expected identifier",
    "SYN002": "unexpected token",
    "SYN003": "unexpected end of input",
    "SYN004": "malformed label set or role list",
    "SYN005": "invalid constraint expression",
}
SEM_CODES = {
    "SEM001": "unknown concept",
    "SEM002": "decision concept has no anchor",
    "SEM003": "is_a cycle",
    "SEM004": "contains cycle",
    "SEM005": "bad has_a role list",
    "SEM006": "predicate arity mismatch",
    "SEM007": "unbound variable",
    "SEM008": "cardinality bound exceeds operand count",
    "SEM009": "mutual exclusion over mixed anchors",
    "SEM010": "concept unreachable from any input concept",
    "SEM011": "duplicate edge",
    "SEM012": "unsupported logic operation",
    "SEM013": "long anchor chain",
}
ALL_CODES = {**SYN_CODES, **SEM_CODES}


@dataclass(frozen=True)
class Diagnostic:
    code: str
    severity: Severity
    span: SourceSpan
    message: str
    hint: str

    def __post_init__(self) -> None:
        if self.code not in ALL_CODES:
            raise ValueError(f"unknown diagnostic code {self.code!r}")
        if not self.message or not self.hint:
            raise ValueError("diagnostic message and hint must be nonempty")

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def sort_key(self) -> tuple:
        return (self.span.start_line, self.span.start_col, self.code)

    def to_record(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity.value,
            "line": self.span.start_line,
            "col": self.span.start_col,
            "message": self.message,
            "hint": self.hint,
        }

    def __str__(self) -> str:
        return f"{self.code} at line {self.span.start_line}: {self.message}. Fix: {self.hint}"


def error(code: str, span: SourceSpan, message: str, hint: str) -> Diagnostic:
    return Diagnostic(code, Severity.ERROR, span, message, hint)


def warning(code: str, span: SourceSpan, message: str, hint: str) -> Diagnostic:
    return Diagnostic(code, Severity.WARNING, span, message, hint)


@dataclass(frozen=True)
class ValidationReport:
    """Ordered collection of diagnostics with error/warning tallies."""

    diagnostics: tuple[Diagnostic, ...] = field(default_factory=tuple)

    @classmethod
    def from_list(cls, diags: list[Diagnostic]) -> ValidationReport:
        return cls(tuple(sorted(diags, key=Diagnostic.sort_key)))

    @property
    def error_count(self) -> int:
        return sum(1 for d in self.diagnostics if d.is_error)

    @property
    def warning_count(self) -> int:
        return len(self.diagnostics) - self.error_count

    @property
    def error_free(self) -> bool:
        return self.error_count == 0

    def to_jsonl(self) -> str:
        """Line-delimited machine-readable export, one record per diagnostic."""
        return "".join(json.dumps(d.to_record(), sort_keys=True) + "\n" for d in self.diagnostics)
