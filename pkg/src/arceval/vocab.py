"""Closed vocabularies: quality attributes, agent artefacts, span kinds."""

from __future__ import annotations

import re

from arceval.errors import VocabularyError

QUALITIES: tuple[str, ...] = (
    "accuracy",
    "adaptability",
    "efficiency",
    "privacy",
    "security",
    "fairness",
    "availability",
    "observability",
    "transparency",
    "safety",
    "contestability",
)

ARTEFACTS: tuple[str, ...] = (
    "agent",
    "context-engine",
    "prompt-optimiser",
    "reasoning-planning",
    "workflow-execution",
    "agent-memory",
    "short-term-memory",
    "long-term-memory",
    "retriever",
    "reranker",
    "generator",
    "knowledge-base",
    "vector-database",
    "relational-database",
    "data-crawler",
    "data-chunker",
    "external-tool",
    "other-agent",
    "guardrails",
    "log-repository",
    "agentops",
    "foundation-model",
    "evaluator",
    "monitoring",
)

# Child artefacts that specialise a broader one.
ARTEFACT_PARENT: dict[str, str] = {
    "short-term-memory": "agent-memory",
    "long-term-memory": "agent-memory",
    "vector-database": "knowledge-base",
    "relational-database": "knowledge-base",
}

# The whole system; every supporting approach touches it.
WHOLE_AGENT = "agent"

SPAN_KINDS: tuple[str, ...] = (
    "goal",
    "reasoning",
    "planning",
    "workflow",
    "task",
    "tool",
    "evaluation",
    "fm",
    "feedback",
    "contest-opened",
    "contest-resolved",
    "guardrail",
    "log",
)

PRIORITIES: tuple[str, ...] = ("high", "medium", "low", "unset")
BANDS: tuple[str, ...] = ("high", "medium", "low")
APPROACH_KINDS: tuple[str, ...] = ("pattern", "tactic", "decision", "guardrail")
COVERAGE_LEVELS: tuple[str, ...] = ("full", "partial", "none")

LABEL_RE = re.compile(r"[a-z][a-z0-9_]*(?:-[a-z0-9_]+)*\Z")


def _member(vocabulary: str, values: tuple[str, ...], token: object) -> str:
    if not isinstance(token, str) or token not in values:
        raise VocabularyError(vocabulary, str(token))
    return token


def parse_quality(token: object) -> str:
    return _member("quality attribute", QUALITIES, token)


def parse_artefact(token: object) -> str:
    return _member("artefact", ARTEFACTS, token)


def parse_span_kind(token: object) -> str:
    return _member("span kind", SPAN_KINDS, token)


def parse_priority(token: object) -> str:
    return _member("priority", PRIORITIES, token)


def is_label(token: object) -> bool:
    return isinstance(token, str) and LABEL_RE.match(token) is not None


def artefact_covers(broad: str, narrow: str) -> bool:
    """True when ``narrow`` is ``broad`` or one of its specialisations."""
    if broad == WHOLE_AGENT or broad == narrow:
        return True
    return ARTEFACT_PARENT.get(narrow) == broad
