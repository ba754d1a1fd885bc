"""Source positions for diagnostics."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class SourceSpan:
    """A half-open region of source text, 1-based lines and columns."""

    start_line: int = 1
    start_col: int = 1
    end_line: int = 1
    end_col: int = 1
    file: str | None = None

    def __post_init__(self) -> None:
        if (self.end_line, self.end_col) < (self.start_line, self.start_col):
            raise ValueError(f"span end before start: {self}")

    def merge(self, other: SourceSpan) -> SourceSpan:
        """Smallest span covering both self and other."""
        start = min((self.start_line, self.start_col), (other.start_line, other.start_col))
        end = max((self.end_line, self.end_col), (other.end_line, other.end_col))
        return SourceSpan(start[0], start[1], end[0], end[1], self.file)

    def __str__(self) -> str:
        return f"{self.start_line}:{self.start_col}"


POINT = SourceSpan()
