"""Record types shared across the toolkit.

All records are frozen; list-valued fields are tuples so that records hash
and compare by value. ``span`` fields locate an object in its source document
and are excluded from equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from arceval.errors import SourceSpan, ValidationError
from arceval.measures import MeasureSpec
from arceval.vocab import (
    APPROACH_KINDS,
    QUALITIES,
    parse_artefact,
    parse_priority,
    parse_quality,
)


@dataclass(frozen=True)
class ExternalAssessment:
    """Result of a human-judged measure, recorded outside telemetry."""

    name: str
    passed: bool
    note: str = ""
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class GeneralScenario:
    quality: str
    source: str
    stimulus: str
    environment: str
    artefacts: tuple[str, ...]
    response: str
    measures: tuple[str, ...] = ()
    metrics: tuple[str, ...] = ()
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        parse_quality(self.quality)
        for a in self.artefacts:
            parse_artefact(a)


@dataclass(frozen=True)
class ContextScenario:
    id: str
    quality: str
    source: str
    stimulus: str
    environment: str
    artefacts: tuple[str, ...]
    response: str
    measures: tuple[MeasureSpec, ...] = ()
    priority: str = "unset"
    seq: int | None = None
    external_assessments: tuple[ExternalAssessment, ...] = ()
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self.id:
            raise ValidationError("scenario id must be non-empty")
        parse_quality(self.quality)
        parse_priority(self.priority)
        if not self.artefacts:
            raise ValidationError(f"scenario {self.id}: artefacts must be non-empty")
        for a in self.artefacts:
            parse_artefact(a)
        if self.seq is not None and (isinstance(self.seq, bool) or not isinstance(self.seq, int) or self.seq < 1):
            raise ValidationError(f"scenario {self.id}: seq must be a positive integer")


@dataclass(frozen=True)
class GovernanceTag:
    id: str
    text: str
    qualities: tuple[str, ...] = ()
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        for q in self.qualities:
            parse_quality(q)


@dataclass(frozen=True)
class Component:
    id: str
    artefact: str
    description: str = ""
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        parse_artefact(self.artefact)


@dataclass(frozen=True)
class ArchApproach:
    id: str
    kind: str
    components: tuple[str, ...] = ()
    supports: tuple[str, ...] = ()
    coverage: str = "full"
    description: str = ""
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in APPROACH_KINDS:
            raise ValidationError(f"approach {self.id}: kind must be one of {', '.join(APPROACH_KINDS)}")
        if self.coverage not in ("full", "partial"):
            raise ValidationError(f"approach {self.id}: coverage must be full or partial")

    @property
    def supported_qualities(self) -> tuple[str, ...]:
        return tuple(s for s in self.supports if s in QUALITIES)

    @property
    def supported_scenarios(self) -> tuple[str, ...]:
        return tuple(s for s in self.supports if s not in QUALITIES)


@dataclass(frozen=True)
class ArchitectureModel:
    name: str
    version: str = ""
    components: tuple[Component, ...] = ()
    approaches: tuple[ArchApproach, ...] = ()
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        ids = [c.id for c in self.components]
        if len(set(ids)) != len(ids):
            raise ValidationError(f"architecture {self.name}: duplicate component id")
        approach_ids = [a.id for a in self.approaches]
        if len(set(approach_ids)) != len(approach_ids):
            raise ValidationError(f"architecture {self.name}: duplicate approach id")
        known = set(ids)
        for a in self.approaches:
            for c in a.components:
                if c not in known:
                    raise ValidationError(f"approach {a.id} references unknown component {c!r}")

    def component(self, cid: str) -> Component:
        for c in self.components:
            if c.id == cid:
                return c
        raise KeyError(cid)


@dataclass(frozen=True)
class PriorityInput:
    scenario: str
    impact: int
    risk: int
    relevance: int
    stakeholder: str
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        for name in ("impact", "risk", "relevance"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or not 1 <= v <= 5:
                raise ValidationError(f"{name} score for {self.scenario} must be an integer 1-5")


@dataclass(frozen=True)
class Finding:
    severity: str  # error | warning | info
    code: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: [{self.code}] {self.subject}: {self.message}"


# -- analysis ledger ---------------------------------------------------------


@dataclass(frozen=True)
class Risk:
    id: str
    text: str
    scenarios: tuple[str, ...] = ()
    approaches: tuple[str, ...] = ()
    status: str = "open"

    def __post_init__(self) -> None:
        if self.status not in ("open", "mitigated"):
            raise ValidationError(f"risk {self.id}: status must be open or mitigated")


@dataclass(frozen=True)
class Tradeoff:
    id: str
    text: str
    qualities: tuple[str, ...]
    approach: str

    def __post_init__(self) -> None:
        for q in self.qualities:
            parse_quality(q)
        if len(set(self.qualities)) < 2:
            raise ValidationError(f"tradeoff {self.id}: needs at least two distinct qualities")


@dataclass(frozen=True)
class SensitivityPoint:
    id: str
    text: str
    approach: str
    quality: str

    def __post_init__(self) -> None:
        parse_quality(self.quality)


@dataclass(frozen=True)
class Recommendation:
    id: str
    text: str
    addresses: tuple[str, ...]
    target: str


@dataclass(frozen=True)
class AuditEntry:
    scenario: str
    trigger: str
    old_band: str
    new_band: str
    old_score: str
    new_score: str


@dataclass(frozen=True)
class AnalysisLedger:
    risks: tuple[Risk, ...] = ()
    tradeoffs: tuple[Tradeoff, ...] = ()
    sensitivities: tuple[SensitivityPoint, ...] = ()
    recommendations: tuple[Recommendation, ...] = ()
    audit: tuple[AuditEntry, ...] = ()

    def check(self) -> None:
        """Validate id uniqueness, citations and recommendation references."""
        for label, items in (
            ("risk", self.risks),
            ("tradeoff", self.tradeoffs),
            ("sensitivity", self.sensitivities),
            ("recommendation", self.recommendations),
        ):
            ids = [i.id for i in items]
            if len(set(ids)) != len(ids):
                raise ValidationError(f"duplicate {label} id")
        for r in self.risks:
            if not r.scenarios and not r.approaches:
                raise ValidationError(f"risk {r.id} cites no scenario or approach")
        risk_ids = {r.id for r in self.risks}
        for rec in self.recommendations:
            if not rec.addresses:
                raise ValidationError(f"recommendation {rec.id} addresses no risk")
            for rid in rec.addresses:
                if rid not in risk_ids:
                    raise ValidationError(f"recommendation {rec.id} addresses unknown risk {rid!r}")


