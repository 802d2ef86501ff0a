"""Source positions used by tokens, AST nodes, and diagnostics."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceLocation:
    """A position in pipeline source text.

    ``line`` and ``column`` are 1-based, ``offset`` is a 0-based byte
    offset into the source.
    """

    line: int
    column: int
    offset: int = 0

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


UNKNOWN_LOCATION = SourceLocation(line=1, column=1, offset=0)
