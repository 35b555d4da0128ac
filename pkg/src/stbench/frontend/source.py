"""Source text handling: units, byte spans, and line/column lookup."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Span:
    """Half-open byte range [start, end) into a SourceUnit's text."""

    start: int
    end: int

    def merge(self, other: "Span") -> "Span":
        return Span(min(self.start, other.start), max(self.end, other.end))


@dataclass
class SourceUnit:
    """A compilation unit: raw text plus a total offset -> (line, col) table.

    Lines and columns are 1-based.  Offsets up to and including len(text)
    resolve (the end offset maps to the position just past the last char),
    so span endpoints always have a defined location.
    """

    text: str
    origin: str = "<memory>"
    _line_starts: list[int] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        starts = [0]
        for i, ch in enumerate(self.text):
            if ch == "\n":
                starts.append(i + 1)
        self._line_starts = starts

    def linecol(self, offset: int) -> tuple[int, int]:
        if offset < 0:
            offset = 0
        if offset > len(self.text):
            offset = len(self.text)
        line = bisect.bisect_right(self._line_starts, offset)
        col = offset - self._line_starts[line - 1] + 1
        return line, col

    def line_of(self, offset: int) -> int:
        return self.linecol(offset)[0]

    def line_count(self) -> int:
        return len(self._line_starts)

    def line_text(self, line: int) -> str:
        start = self._line_starts[line - 1]
        end = self._line_starts[line] - 1 if line < len(self._line_starts) else len(self.text)
        return self.text[start:end].rstrip("\r")

    def describe(self, span: Span) -> str:
        line, col = self.linecol(span.start)
        return f"{self.origin}:{line}:{col}"
