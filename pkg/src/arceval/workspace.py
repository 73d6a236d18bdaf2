"""Evaluation workspace: process state, coverage checks and persistence.

A workspace directory holds ``.arc`` documents plus an ``arceval.json``
manifest naming those documents, the current architecture revision, goals,
requirements, prioritisation weights, completed steps and the analysis ledger.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

from arceval.dsl import Document, parse_file, serialize
from arceval.errors import ProcessError, ValidationError
from arceval.model import (
    AnalysisLedger,
    ArchitectureModel,
    AuditEntry,
    ContextScenario,
    Finding,
    GovernanceTag,
    PriorityInput,
    Recommendation,
    Risk,
    SensitivityPoint,
    Tradeoff,
)
from arceval.vocab import parse_quality

MANIFEST = "arceval.json"

DESIGN_STEPS = (
    "understand-goals",
    "review-governance",
    "identify-requirements",
    "review-architecture",
    "define-scenarios",
    "prioritise-scenarios",
    "analyse-architecture",
    "improve-architecture",
)
RUNTIME_STEPS = ("monitor-risks", "reprioritise")
STEPS = DESIGN_STEPS + RUNTIME_STEPS

PREREQUISITES: dict[str, tuple[str, ...]] = {
    "understand-goals": (),
    "review-governance": (),
    "identify-requirements": ("understand-goals", "review-governance"),
    "review-architecture": (),
    "define-scenarios": ("identify-requirements",),
    "prioritise-scenarios": ("define-scenarios",),
    "analyse-architecture": ("prioritise-scenarios", "review-architecture"),
    "improve-architecture": ("analyse-architecture",),
    "monitor-risks": ("improve-architecture",),
    "reprioritise": ("monitor-risks",),
}
REOPENED_BY_REPRIORITISE = ("analyse-architecture", "improve-architecture")


@dataclass(frozen=True)
class GoalStatement:
    id: str
    text: str
    clarified: bool = False


@dataclass(frozen=True)
class QualityRequirement:
    quality: str
    rationale: str = ""
    governance_refs: tuple[str, ...] = ()
    guardrail: bool = False

    def __post_init__(self) -> None:
        parse_quality(self.quality)


@dataclass(frozen=True)
class Workspace:
    goals: tuple[GoalStatement, ...] = ()
    governance: tuple[GovernanceTag, ...] = ()
    requirements: tuple[QualityRequirement, ...] = ()
    architectures: tuple[ArchitectureModel, ...] = ()
    current_architecture: str | None = None
    scenarios: tuple[ContextScenario, ...] = ()
    priority_inputs: tuple[PriorityInput, ...] = ()
    weights: tuple[float, float, float] = (1, 1, 1)
    analysis: AnalysisLedger = field(default_factory=AnalysisLedger)
    completed: tuple[str, ...] = ()

    @property
    def current(self) -> ArchitectureModel | None:
        return self.architecture(self.current_architecture) if self.current_architecture else None

    def architecture(self, name: str) -> ArchitectureModel:
        for m in self.architectures:
            if m.name == name or (m.version and m.version == name):
                return m
        raise KeyError(name)

    def scenario(self, sid: str) -> ContextScenario:
        for s in self.scenarios:
            if s.id == sid:
                return s
        raise KeyError(sid)


def _merge_by_id(old: tuple, new, key: str) -> tuple:
    """Append new items, replacing existing items with the same key in place."""
    items = list(old)
    index = {getattr(x, key): i for i, x in enumerate(items)}
    for x in new:
        k = getattr(x, key)
        if k in index:
            items[index[k]] = x
        else:
            index[k] = len(items)
            items.append(x)
    return tuple(items)


def _merge_ledger(ledger: AnalysisLedger, payload: Mapping[str, Any]) -> AnalysisLedger:
    return AnalysisLedger(
        risks=_merge_by_id(ledger.risks, payload.get("risks", ()), "id"),
        tradeoffs=_merge_by_id(ledger.tradeoffs, payload.get("tradeoffs", ()), "id"),
        sensitivities=_merge_by_id(ledger.sensitivities, payload.get("sensitivities", ()), "id"),
        recommendations=_merge_by_id(ledger.recommendations, payload.get("recommendations", ()), "id"),
        audit=ledger.audit + tuple(payload.get("audit", ())),
    )


def missing_prerequisite(completed, step: str) -> str | None:
    for req in PREREQUISITES[step]:
        if req not in completed:
            return req
    return None


def advance(ws: Workspace, step: str, payload: Mapping[str, Any] | None = None) -> Workspace:
    """Return a new workspace with ``step`` completed and ``payload`` merged.

    Payload keys: goals, governance, requirements, architectures, current,
    scenarios, priority_inputs, weights, and ledger entries (risks, tradeoffs,
    sensitivities, recommendations, audit). Keyed records replace earlier
    records with the same id. ``reprioritise`` re-opens analysis and
    improvement.
    """
    if step not in PREREQUISITES:
        raise ValidationError(f"unknown step {step!r}")
    missing = missing_prerequisite(ws.completed, step)
    if missing is not None:
        raise ProcessError(step, missing)
    payload = dict(payload or {})
    unknown = set(payload) - {
        "goals", "governance", "requirements", "architectures", "current", "scenarios",
        "priority_inputs", "weights", "risks", "tradeoffs", "sensitivities",
        "recommendations", "audit",
    }
    if unknown:
        raise ValidationError(f"unknown payload keys: {', '.join(sorted(unknown))}")
    changes: dict[str, Any] = {}
    if "goals" in payload:
        changes["goals"] = _merge_by_id(ws.goals, payload["goals"], "id")
    if "governance" in payload:
        changes["governance"] = _merge_by_id(ws.governance, payload["governance"], "id")
    if "requirements" in payload:
        changes["requirements"] = _merge_by_id(ws.requirements, payload["requirements"], "quality")
    if "architectures" in payload:
        names = {m.name for m in ws.architectures}
        added = tuple(payload["architectures"])
        for m in added:
            if m.name in names:
                raise ValidationError(f"architecture revision {m.name!r} already exists (revisions are append-only)")
            names.add(m.name)
        changes["architectures"] = ws.architectures + added
        if added and "current" not in payload:
            changes["current_architecture"] = added[-1].name
    if "current" in payload:
        names = {m.name for m in changes.get("architectures", ws.architectures)}
        if payload["current"] not in names:
            raise ValidationError(f"unknown architecture revision {payload['current']!r}")
        changes["current_architecture"] = payload["current"]
    if "scenarios" in payload:
        changes["scenarios"] = _merge_by_id(ws.scenarios, payload["scenarios"], "id")
    if "priority_inputs" in payload:
        existing = {(p.scenario, p.stakeholder): p for p in ws.priority_inputs}
        for p in payload["priority_inputs"]:
            existing[(p.scenario, p.stakeholder)] = p
        changes["priority_inputs"] = tuple(existing.values())
    if "weights" in payload:
        changes["weights"] = tuple(payload["weights"])
    if any(k in payload for k in ("risks", "tradeoffs", "sensitivities", "recommendations", "audit")):
        changes["analysis"] = _merge_ledger(ws.analysis, payload)

    completed = list(ws.completed)
    if step == "reprioritise":
        completed = [s for s in completed if s not in REOPENED_BY_REPRIORITISE]
    if step not in completed:
        completed.append(step)
    changes["completed"] = tuple(completed)
    return replace(ws, **changes)


def coverage_check(ws: Workspace) -> list[Finding]:
    """Traceability findings between governance, requirements and scenarios."""
    if "identify-requirements" not in ws.completed:
        raise ProcessError("coverage-check", "identify-requirements")
    findings: list[Finding] = []
    referenced = {ref for r in ws.requirements for ref in r.governance_refs}
    tag_ids = {t.id for t in ws.governance}
    for r in ws.requirements:
        for ref in r.governance_refs:
            if ref not in tag_ids:
                findings.append(Finding("error", "unknown-governance-ref", r.quality,
                                        f"requirement cites unknown governance tag {ref}"))
    for t in ws.governance:
        if t.id not in referenced:
            findings.append(Finding("warning", "governance-unmapped", t.id,
                                    "governance tag is not mapped to any requirement"))
    scenario_qualities = {s.quality for s in ws.scenarios}
    required = {r.quality for r in ws.requirements}
    for r in ws.requirements:
        if r.quality not in scenario_qualities:
            findings.append(Finding("warning", "requirement-without-scenario", r.quality,
                                    "no context scenario exercises this requirement"))
    for s in ws.scenarios:
        if s.quality not in required:
            findings.append(Finding("warning", "scenario-outside-requirements", s.id,
                                    f"scenario targets {s.quality}, which is not a requirement"))
    return findings


@dataclass(frozen=True)
class Change:
    category: str  # component | approach
    action: str  # added | removed | modified
    id: str
    detail: str = ""

    def __str__(self) -> str:
        text = f"{self.action} {self.category} {self.id}"
        return f"{text} ({self.detail})" if self.detail else text


def _changed_fields(a, b, names) -> str:
    return ", ".join(n for n in names if getattr(a, n) != getattr(b, n))


def diff_architectures(before: ArchitectureModel, after: ArchitectureModel) -> list[Change]:
    """Components and approaches added, removed or modified, matched by id."""
    changes: list[Change] = []
    for category, old, new, names in (
        ("component", before.components, after.components, ("artefact", "description")),
        ("approach", before.approaches, after.approaches,
         ("kind", "components", "supports", "coverage", "description")),
    ):
        old_by_id = {x.id: x for x in old}
        new_by_id = {x.id: x for x in new}
        for xid in sorted(old_by_id.keys() - new_by_id.keys()):
            changes.append(Change(category, "removed", xid))
        for xid in sorted(new_by_id.keys() - old_by_id.keys()):
            changes.append(Change(category, "added", xid, getattr(new_by_id[xid], names[0])))
        for xid in sorted(old_by_id.keys() & new_by_id.keys()):
            diff = _changed_fields(old_by_id[xid], new_by_id[xid], names)
            if diff:
                changes.append(Change(category, "modified", xid, diff))
    return changes


# -- persistence -------------------------------------------------------------


def _plain(record) -> dict:
    out = {}
    for f in fields(record):
        if f.name == "span":
            continue
        value = getattr(record, f.name)
        out[f.name] = list(value) if isinstance(value, tuple) else value
    return out


def _ledger_to_json(ledger: AnalysisLedger) -> dict:
    return {
        "risks": [_plain(r) for r in ledger.risks],
        "tradeoffs": [_plain(t) for t in ledger.tradeoffs],
        "sensitivities": [_plain(s) for s in ledger.sensitivities],
        "recommendations": [_plain(r) for r in ledger.recommendations],
        "audit": [_plain(a) for a in ledger.audit],
    }


def _tuples(obj: Mapping) -> dict:
    return {k: tuple(v) if isinstance(v, list) else v for k, v in obj.items()}


def ledger_from_json(obj: Mapping) -> AnalysisLedger:
    ledger = AnalysisLedger(
        risks=tuple(Risk(**_tuples(r)) for r in obj.get("risks", [])),
        tradeoffs=tuple(Tradeoff(**_tuples(t)) for t in obj.get("tradeoffs", [])),
        sensitivities=tuple(SensitivityPoint(**_tuples(s)) for s in obj.get("sensitivities", [])),
        recommendations=tuple(Recommendation(**_tuples(r)) for r in obj.get("recommendations", [])),
        audit=tuple(AuditEntry(**a) for a in obj.get("audit", [])),
    )
    ledger.check()
    return ledger


def manifest_dict(ws: Workspace, documents: list[str]) -> dict:
    return {
        "documents": documents,
        "current_architecture": ws.current_architecture,
        "weights": list(ws.weights),
        "completed": list(ws.completed),
        "goals": [_plain(g) for g in ws.goals],
        "requirements": [_plain(r) for r in ws.requirements],
        "ledger": _ledger_to_json(ws.analysis),
    }


def save_manifest(ws: Workspace, directory: str | os.PathLike, documents: list[str]) -> Path:
    """Rewrite only the manifest, keeping the listed documents untouched."""
    path = Path(directory) / MANIFEST
    path.write_text(json.dumps(manifest_dict(ws, documents), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def manifest_documents(directory: str | os.PathLike) -> list[str]:
    return list(json.loads((Path(directory) / MANIFEST).read_text(encoding="utf-8")).get("documents", []))


def check_references(ws: Workspace) -> None:
    """Every scenario id cited by priorities or the ledger must exist."""
    known = {s.id for s in ws.scenarios}
    for p in ws.priority_inputs:
        if p.scenario not in known:
            raise ValidationError(f"priority input from {p.stakeholder} names unknown scenario {p.scenario!r}")
    for r in ws.analysis.risks:
        for sid in r.scenarios:
            if sid not in known:
                raise ValidationError(f"risk {r.id} cites unknown scenario {sid!r}")
    for e in ws.analysis.audit:
        if e.scenario not in known:
            raise ValidationError(f"audit entry names unknown scenario {e.scenario!r}")


def save_workspace(ws: Workspace, directory: str | os.PathLike) -> Path:
    """Write documents and manifest into ``directory``; returns the manifest path."""
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    docs = {
        "governance.arc": Document(governance=list(ws.governance)),
        "scenarios.arc": Document(scenarios=list(ws.scenarios)),
        "architectures.arc": Document(architectures=list(ws.architectures)),
        "priorities.arc": Document(priorities=list(ws.priority_inputs)),
    }
    names = []
    for name, doc in docs.items():
        (root / name).write_text(serialize(doc), encoding="utf-8")
        names.append(name)
    return save_manifest(ws, root, names)


def load_workspace(directory: str | os.PathLike) -> Workspace:
    root = Path(directory)
    manifest = json.loads((root / MANIFEST).read_text(encoding="utf-8"))
    doc = Document()
    for name in manifest.get("documents", []):
        doc.extend(parse_file(root / name))
    for label, items, key in (
        ("scenario", doc.scenarios, "id"),
        ("architecture", doc.architectures, "name"),
        ("governance tag", doc.governance, "id"),
    ):
        ids = [getattr(x, key) for x in items]
        if len(ids) != len(set(ids)):
            raise ValidationError(f"duplicate {label} id across workspace documents")
    completed = tuple(manifest.get("completed", []))
    for step in completed:
        if step not in PREREQUISITES:
            raise ValidationError(f"unknown step {step!r} in manifest")
    current = manifest.get("current_architecture")
    if current is not None and current not in {m.name for m in doc.architectures}:
        raise ValidationError(f"current architecture {current!r} not found in documents")
    ws = Workspace(
        goals=tuple(GoalStatement(**g) for g in manifest.get("goals", [])),
        governance=tuple(doc.governance),
        requirements=tuple(QualityRequirement(**_tuples(r)) for r in manifest.get("requirements", [])),
        architectures=tuple(doc.architectures),
        current_architecture=current,
        scenarios=tuple(doc.scenarios),
        priority_inputs=tuple(doc.priorities),
        weights=tuple(manifest.get("weights", [1, 1, 1])),
        analysis=ledger_from_json(manifest.get("ledger", {})),
        completed=completed,
    )
    check_references(ws)
    return ws
