"""Exception hierarchy shared by every arceval module."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SourceSpan:
    """1-based position of an object or error inside a source document."""

    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


class ArcEvalError(Exception):
    """Base class for all arceval errors."""


class VocabularyError(ArcEvalError, ValueError):
    """A label is not a member of a closed vocabulary."""

    def __init__(self, vocabulary: str, token: str):
        super().__init__(f"unknown {vocabulary} label {token!r}")
        self.vocabulary = vocabulary
        self.token = token


class ParseError(ArcEvalError):
    """Syntax or semantic error in a document, optionally with a position."""

    def __init__(self, message: str, span: SourceSpan | None = None):
        self.message = message
        self.span = span
        super().__init__(f"{span}: {message}" if span else message)


class MeasureError(ParseError):
    """Malformed response-measure expression."""


class ValidationError(ArcEvalError, ValueError):
    """An object violates one of its invariants."""


class ProcessError(ArcEvalError):
    """An evaluation step was attempted out of order."""

    def __init__(self, step: str, missing: str):
        super().__init__(f"cannot advance to {step}: missing {missing}")
        self.step = step
        self.missing = missing
