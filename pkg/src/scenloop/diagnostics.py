"""Structured diagnostics shared by the compiler, sampler and simulator.

Diagnostics are rendered back to the language model during the repair loop,
so their messages must be byte-identical for identical inputs: no object ids,
no float formatting that varies by platform, no timestamps.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Span:
    """1-based source position; ``end_col`` is exclusive."""

    line: int
    col: int
    end_col: int = 0

    def __str__(self) -> str:
        return f"line {self.line}, col {self.col}"


NO_SPAN = Span(0, 0, 0)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str  # stable short identifier, e.g. "UnknownBehavior"
    message: str  # single paragraph, deterministic
    span: Span = NO_SPAN

    def render(self) -> str:
        """One-line rendering in the shape fed back to the LLM."""
        if self.span.line > 0:
            return f"{self.code}: {self.message} ({self.span})"
        return f"{self.code}: {self.message}"


def error(code: str, message: str, span: Span = NO_SPAN) -> Diagnostic:
    return Diagnostic("error", code, message, span)


def warning(code: str, message: str, span: Span = NO_SPAN) -> Diagnostic:
    return Diagnostic("warning", code, message, span)


def render_all(diagnostics: list[Diagnostic]) -> str:
    """Join diagnostics one per line, in source order."""
    return "\n".join(d.render() for d in diagnostics)


class SourceError(Exception):
    """Raised by compiler stages that cannot return a partial result.

    Carries the diagnostics so the repair loop can feed them back verbatim.
    """

    def __init__(self, diagnostics: list[Diagnostic]):
        super().__init__(render_all(diagnostics))
        self.diagnostics = list(diagnostics)

    @classmethod
    def single(cls, code: str, message: str, span: Span = NO_SPAN) -> "SourceError":
        return cls([error(code, message, span)])
