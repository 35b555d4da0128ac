"""Shared diagnostic records and error types for the frontend passes.

Both the parser and the resolver collect every problem they can find in one
pass and raise a single error carrying the full list.
"""

from __future__ import annotations

from dataclasses import dataclass

from .source import SourceUnit, Span


@dataclass
class Diagnostic:
    message: str
    span: Span
    expected: str | None = None

    def render(self, src: SourceUnit | None = None) -> str:
        loc = src.describe(self.span) if src else f"@{self.span.start}"
        hint = f" (expected {self.expected})" if self.expected else ""
        return f"{loc}: {self.message}{hint}"


class FrontendError(Exception):
    """Base for multi-diagnostic frontend failures."""

    def __init__(self, diagnostics: list[Diagnostic], src: SourceUnit | None = None):
        self.diagnostics = diagnostics
        self.src = src
        super().__init__("; ".join(d.render(src) for d in diagnostics))


class ParseError(FrontendError):
    pass


class ResolveError(FrontendError):
    pass
