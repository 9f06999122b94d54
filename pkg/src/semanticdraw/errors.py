"""Exception hierarchy shared across the engine."""

from __future__ import annotations


class SemanticDrawError(Exception):
    """Base class for all engine errors."""


class InvalidScene(SemanticDrawError):
    """Scene failed validation; carries the violation list."""

    def __init__(self, violations, message: str = "invalid scene"):
        self.violations = list(violations)
        detail = "; ".join(f"{v.path}:{v.rule}" for v in self.violations[:5])
        super().__init__(f"{message}: {detail}" if detail else message)


class ParseError(SemanticDrawError):
    """Input document could not be parsed."""


class OrphanPath(SemanticDrawError):
    """A detail path has no parent entry."""


class InvalidPath(SemanticDrawError):
    """A detail path is syntactically malformed."""


class PathNotFound(SemanticDrawError):
    """An edit or expansion target does not exist in the scene."""


class EmptyInput(SemanticDrawError):
    """No usable content in the input text."""


class BadK(SemanticDrawError):
    """Cluster count outside the valid range."""


class InvalidTemplate(SemanticDrawError):
    """Composition template violates an invariant."""

    def __init__(self, rule: str, message: str | None = None):
        self.rule = rule
        super().__init__(message or rule)


class EmptyLibrary(SemanticDrawError):
    """Template selection over an empty library."""


class InvalidEdit(SemanticDrawError):
    """A scene edit is malformed (unknown op, field, or bad value)."""


class StageOrderViolation(SemanticDrawError):
    """Pipeline operation invoked out of stage order."""


class NotFound(SemanticDrawError):
    """Session id has no persisted state."""


class EmptyPrompt(SemanticDrawError):
    """Image generation requested with an empty prompt."""


class BackendError(SemanticDrawError):
    """A model backend failed after the retry policy was exhausted."""

    def __init__(self, message: str, status: int | None = None, attempts: int = 1):
        self.status = status
        self.attempts = attempts
        super().__init__(f"{message} (status={status}, attempts={attempts})")


class MalformedOutput(SemanticDrawError):
    """Backend returned output that failed structured validation after a reprompt."""


class EmptyCorpus(SemanticDrawError):
    """Benchmark invoked with no input texts."""


class EvaluationFailed(SemanticDrawError):
    """Every benchmark sample failed; no report can be produced."""
