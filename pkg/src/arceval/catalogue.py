"""Built-in general-scenario catalogue and governance guardrail tags."""

from __future__ import annotations

from dataclasses import replace
from functools import lru_cache
from importlib import resources
from typing import Any, Iterable, Mapping

from arceval.dsl import parse_document
from arceval.errors import ValidationError
from arceval.measures import MeasureSpec, parse_measure
from arceval.model import ContextScenario, ExternalAssessment, GeneralScenario, GovernanceTag
from arceval.vocab import QUALITIES, parse_artefact, parse_priority

_OVERRIDABLE = (
    "seq",
    "priority",
    "source",
    "stimulus",
    "environment",
    "artefacts",
    "response",
    "measures",
    "external_assessments",
)


def _data(name: str) -> str:
    return resources.files("arceval").joinpath(f"data/{name}").read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def _builtin() -> tuple[GeneralScenario, ...]:
    doc = parse_document(_data("catalogue.arc"), "catalogue.arc")
    by_quality = {g.quality: g for g in doc.generals}
    return tuple(by_quality[q] for q in QUALITIES)


def builtin_catalogue() -> list[GeneralScenario]:
    """The eleven built-in general scenarios, in quality-attribute order."""
    return list(_builtin())


def load_catalogue(text: str | None = None, filename: str = "<catalogue>") -> list[GeneralScenario]:
    """Built-in catalogue with ``general`` blocks from ``text`` replacing entries by quality."""
    merged = {g.quality: g for g in _builtin()}
    if text:
        for g in parse_document(text, filename).generals:
            merged[g.quality] = g
    return [merged[q] for q in QUALITIES]


def catalogue_index(catalogue: Iterable[GeneralScenario] | None = None) -> dict[str, GeneralScenario]:
    return {g.quality: g for g in (builtin_catalogue() if catalogue is None else catalogue)}


def default_governance_tags() -> list[GovernanceTag]:
    return parse_document(_data("governance.arc"), "governance.arc").governance


def _measure(value: Any) -> MeasureSpec:
    return value if isinstance(value, MeasureSpec) else parse_measure(value)


def _assessment(value: Any) -> ExternalAssessment:
    if isinstance(value, ExternalAssessment):
        return value
    if isinstance(value, Mapping):
        return ExternalAssessment(value["name"], bool(value["pass"]), value.get("note", ""))
    name, passed, *rest = value
    return ExternalAssessment(name, bool(passed), rest[0] if rest else "")


def instantiate(general: GeneralScenario, id: str, overrides: Mapping[str, Any] | None = None) -> ContextScenario:
    """Draft a context scenario from a general scenario.

    Fields not overridden carry the general templates verbatim; the quality is
    always the general scenario's. Measure overrides may be expression strings.
    """
    overrides = dict(overrides or {})
    for key in overrides:
        if key not in _OVERRIDABLE:
            raise ValidationError(f"cannot override field {key!r}")
    if not id:
        raise ValidationError("scenario id must be non-empty")
    fields: dict[str, Any] = {
        "id": id,
        "quality": general.quality,
        "source": general.source,
        "stimulus": general.stimulus,
        "environment": general.environment,
        "artefacts": general.artefacts,
        "response": general.response,
    }
    if "artefacts" in overrides:
        fields["artefacts"] = tuple(parse_artefact(a) for a in overrides.pop("artefacts"))
    if "measures" in overrides:
        fields["measures"] = tuple(_measure(m) for m in overrides.pop("measures"))
    if "external_assessments" in overrides:
        fields["external_assessments"] = tuple(_assessment(a) for a in overrides.pop("external_assessments"))
    if "priority" in overrides:
        fields["priority"] = parse_priority(overrides.pop("priority"))
    fields.update(overrides)
    return ContextScenario(**fields)


def with_overrides(scenario: ContextScenario, overrides: Mapping[str, Any]) -> ContextScenario:
    """Apply overrides to an existing scenario (idempotent)."""
    general = GeneralScenario(
        scenario.quality, scenario.source, scenario.stimulus, scenario.environment,
        scenario.artefacts, scenario.response,
    )
    base = instantiate(general, scenario.id, {k: v for k, v in overrides.items()})
    kept = {
        k: getattr(scenario, k)
        for k in ("seq", "priority", "measures", "external_assessments")
        if k not in overrides
    }
    return replace(base, **kept)


def map_governance(tags: Iterable[GovernanceTag]) -> tuple[dict[str, list[str]], list[str]]:
    """Map each tag id to its default qualities.

    Returns the mapping and the ids of tags that map to nothing.
    """
    mapping: dict[str, list[str]] = {}
    unmapped: list[str] = []
    for tag in tags:
        if tag.id in mapping:
            raise ValidationError(f"duplicate governance tag id {tag.id!r}")
        mapping[tag.id] = list(tag.qualities)
        if not tag.qualities:
            unmapped.append(tag.id)
    return mapping, unmapped
