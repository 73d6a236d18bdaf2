"""Gap analysis over architecture revisions, risk mitigation, and report rendering."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

from arceval.errors import ValidationError
from arceval.measures import MeasureVerdict, format_number
from arceval.model import AnalysisLedger, ArchitectureModel, ContextScenario, Risk
from arceval.prioritiser import PriorityResult, format_score, prioritise, reprioritise
from arceval.telemetry import format_ts
from arceval.vocab import QUALITIES, WHOLE_AGENT, artefact_covers

FULL = "full"
PARTIAL = "partial"
NONE = "none"

SECTIONS = (
    "Goals",
    "Governance mapping",
    "Requirements",
    "Prioritised scenarios",
    "Coverage",
    "Tradeoffs",
    "Risks",
    "Recommendations",
    "Runtime verdicts",
    "Audit",
)
TITLE = "# Architecture evaluation report"


@dataclass(frozen=True)
class Coverage:
    scenario: str
    quality: str
    level: str
    approaches: tuple[str, ...]
    untouched: tuple[str, ...]
    justification: str


def _related(a: str, b: str) -> bool:
    return artefact_covers(a, b) or artefact_covers(b, a)


def _touched(approaches, arch: ArchitectureModel, artefacts: Iterable[str]) -> set[str]:
    built = [arch.component(c).artefact for a in approaches for c in a.components]
    out = set()
    for art in artefacts:
        if art == WHOLE_AGENT and approaches:
            out.add(art)
        elif any(_related(art, b) for b in built):
            out.add(art)
    return out


def _realised(arch: ArchitectureModel, artefacts: Iterable[str]) -> list[str]:
    present = [c.artefact for c in arch.components]
    return [a for a in artefacts if a == WHOLE_AGENT or any(_related(a, b) for b in present)]


def _coverage(scenario: ContextScenario, arch: ArchitectureModel) -> Coverage:
    supporting = [
        a for a in arch.approaches
        if scenario.id in a.supported_scenarios or scenario.quality in a.supported_qualities
    ]
    ids = tuple(a.id for a in supporting)
    if not supporting:
        return Coverage(scenario.id, scenario.quality, NONE, (), tuple(scenario.artefacts),
                        f"no approach supports {scenario.quality}")
    realised = _realised(arch, scenario.artefacts)
    full_marked = [a for a in supporting if a.coverage == FULL]
    by_full = _touched(full_marked, arch, realised)
    untouched = tuple(a for a in realised if a not in by_full)
    if full_marked and not untouched:
        return Coverage(scenario.id, scenario.quality, FULL, ids, (),
                        f"supported by {', '.join(ids)}")
    if not full_marked:
        why = "supporting approaches are marked partial"
    else:
        why = f"{', '.join(untouched)} not reached by a fully supporting approach"
    return Coverage(scenario.id, scenario.quality, PARTIAL, ids, untouched, why)


def _check_support(scenarios: Sequence[ContextScenario], arch: ArchitectureModel) -> None:
    known = {s.id for s in scenarios}
    for a in arch.approaches:
        for ref in a.supported_scenarios:
            if ref not in known:
                raise ValidationError(f"approach {a.id} supports unknown scenario {ref!r}")


def gap_risk(c: Coverage) -> Risk:
    return Risk(
        id=f"gap-{c.scenario}",
        text=f"{c.quality} scenario {c.scenario} has {c.level} architecture coverage: {c.justification}",
        scenarios=(c.scenario,),
        approaches=c.approaches,
    )


def gap_analysis(
    scenarios: Sequence[ContextScenario],
    arch: ArchitectureModel,
    bands: Mapping[str, str] | None = None,
) -> tuple[list[Coverage], list[Risk]]:
    """Coverage per scenario plus one open risk per high-priority gap.

    none: no approach supports the scenario id or its quality.
    full: every scenario artefact the architecture realises is reached by a
    supporting approach marked full; ``agent`` is reached by any of them.
    partial: supported, but not full.
    ``bands`` overrides each scenario's declared priority.
    """
    _check_support(scenarios, arch)
    bands = bands or {}
    results = [_coverage(s, arch) for s in scenarios]
    risks = [
        gap_risk(c)
        for s, c in zip(scenarios, results)
        if c.level != FULL and bands.get(s.id, s.priority) == "high"
    ]
    return results, risks


def coverage_map(scenarios, arch) -> dict[str, str]:
    return {c.scenario: c.level for c in gap_analysis(scenarios, arch)[0]}


def merge_risks(ledger_risks: Iterable[Risk], generated: Iterable[Risk]) -> list[Risk]:
    """Ledger risks first, then generated risks whose ids are new."""
    out = list(ledger_risks)
    seen = {r.id for r in out}
    for r in generated:
        if r.id not in seen:
            seen.add(r.id)
            out.append(r)
    return out


def apply_mitigations(
    risks: Iterable[Risk],
    ledger: AnalysisLedger,
    scenarios: Sequence[ContextScenario],
    architectures: Sequence[ArchitectureModel],
) -> list[Risk]:
    """Mark a risk mitigated when a recommendation addresses it and every scenario
    it cites has full coverage under the recommendation's target revision."""
    by_name = {}
    for m in architectures:
        by_name[m.name] = m
        if m.version:
            by_name.setdefault(m.version, m)
    by_id = {s.id: s for s in scenarios}
    cache: dict[str, dict[str, str]] = {}
    out = []
    for risk in risks:
        mitigated = False
        if risk.scenarios and all(s in by_id for s in risk.scenarios):
            for rec in ledger.recommendations:
                if risk.id not in rec.addresses or rec.target not in by_name:
                    continue
                if rec.target not in cache:
                    cache[rec.target] = coverage_map(scenarios, by_name[rec.target])
                if all(cache[rec.target][s] == FULL for s in risk.scenarios):
                    mitigated = True
                    break
        out.append(replace(risk, status="mitigated" if mitigated else risk.status))
    return out


# -- report ------------------------------------------------------------------


def _cell(text: str) -> str:
    return " ".join(text.split()).replace("|", "\\|")


def _table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> list[str]:
    if not rows:
        return ["(none)"]
    rows = [[_cell(c) for c in r] for r in rows]
    widths = [max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(headers)]

    def line(cells):
        return "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"

    return [line(headers), "|" + "|".join("-" * (w + 2) for w in widths) + "|"] + [line(r) for r in rows]


def scenario_priorities(ws) -> list[PriorityResult | tuple[str, str]]:
    """Computed priorities with declared bands as overrides; scenarios without
    stakeholder inputs follow, carrying their declared band only."""
    declared = {s.id: s.priority for s in ws.scenarios}
    results: list = []
    if ws.priority_inputs:
        results = prioritise(ws.priority_inputs, ws.weights, declared)
        audited = {e.scenario for e in ws.analysis.audit}
        results = reprioritise(results, audited & {r.scenario for r in results}, ws.weights)
    ranked = {r.scenario for r in results}
    rest = sorted((s for s in ws.scenarios if s.id not in ranked), key=lambda s: s.id)
    return results + [(s.id, s.priority) for s in rest]


def band_map(priorities) -> dict[str, str]:
    out = {}
    for p in priorities:
        if isinstance(p, PriorityResult):
            out[p.scenario] = p.band
        else:
            out[p[0]] = p[1]
    return out


def report_risks(ws, bands: Mapping[str, str] | None = None) -> list[Risk]:
    """Ledger risks merged with gap risks of the current revision, mitigation applied."""
    generated: list[Risk] = []
    if ws.current is not None:
        generated = gap_analysis(ws.scenarios, ws.current, bands)[1]
    risks = merge_risks(ws.analysis.risks, generated)
    return apply_mitigations(risks, ws.analysis, ws.scenarios, ws.architectures)


def _observed(v: MeasureVerdict) -> str:
    return "-" if v.observed is None else format_number(round(v.observed, 6))


def render_report(
    ws,
    verdicts: Mapping[str, Sequence[MeasureVerdict]] | None = None,
    summaries: Sequence = (),
    priorities: Sequence | None = None,
) -> str:
    """Render the evaluation report with stable ``## `` section headings.

    ``verdicts`` maps scenario id to measure verdicts; ``summaries`` are
    monitor violation summaries; ``priorities`` replaces the computed ranking.
    """
    prios = list(priorities) if priorities is not None else scenario_priorities(ws)
    bands = band_map(prios)
    out = [TITLE, ""]
    current = ws.current_architecture or "-"
    out.append(f"Current architecture: {current}")
    out.append(f"Completed steps: {', '.join(ws.completed) or '-'}")

    def section(name: str, lines: list[str]) -> None:
        out.extend(["", f"## {name}", ""])
        out.extend(lines)

    section("Goals", _table(
        ("id", "goal", "clarified"),
        [(g.id, g.text, "yes" if g.clarified else "no") for g in ws.goals]))

    req_by_tag: dict[str, list[str]] = {}
    for r in ws.requirements:
        for ref in r.governance_refs:
            req_by_tag.setdefault(ref, []).append(r.quality)
    section("Governance mapping", _table(
        ("tag", "qualities", "requirements", "text"),
        [(t.id, ", ".join(t.qualities) or "-", ", ".join(req_by_tag.get(t.id, [])) or "-", t.text)
         for t in ws.governance]))

    section("Requirements", _table(
        ("quality", "kind", "governance", "rationale"),
        [(r.quality, "guardrail" if r.guardrail else "quality", ", ".join(r.governance_refs) or "-",
          r.rationale or "-") for r in sorted(ws.requirements, key=lambda r: QUALITIES.index(r.quality))]))

    rows = []
    for p in prios:
        if isinstance(p, PriorityResult):
            rows.append((str(p.rank), p.scenario, format_score(p.score), p.computed_band, p.band,
                         "declared" if p.manual else "computed"))
        else:
            rows.append(("-", p[0], "-", "-", p[1], "declared"))
    section("Prioritised scenarios", _table(("rank", "scenario", "score", "computed", "band", "source"), rows))

    revisions = list(ws.architectures)
    cov_cols = {m.name: coverage_map(ws.scenarios, m) for m in revisions}
    lines = _table(
        ("scenario", "quality", "band") + tuple(m.name + (" (current)" if m.name == ws.current_architecture else "")
                                                for m in revisions),
        [(s.id, s.quality, bands.get(s.id, s.priority)) + tuple(cov_cols[m.name][s.id] for m in revisions)
         for s in sorted(ws.scenarios, key=lambda s: (s.seq or 0, s.id))],
    ) if revisions else ["(no architecture revisions)"]
    if ws.current is not None:
        details = gap_analysis(ws.scenarios, ws.current, bands)[0]
        lines.append("")
        lines.extend(f"- {c.scenario}: {c.level} ({c.justification})" for c in details)
    section("Coverage", lines)

    a = ws.analysis
    section("Tradeoffs", _table(
        ("id", "kind", "approach", "qualities", "text"),
        [(t.id, "tradeoff", t.approach, ", ".join(t.qualities), t.text) for t in a.tradeoffs]
        + [(s.id, "sensitivity", s.approach, s.quality, s.text) for s in a.sensitivities]))

    risks = report_risks(ws, bands)
    section("Risks", _table(
        ("id", "status", "scenarios", "approaches", "text"),
        [(r.id, r.status, ", ".join(r.scenarios) or "-", ", ".join(r.approaches) or "-", r.text) for r in risks]))

    section("Recommendations", _table(
        ("id", "target", "addresses", "text"),
        [(r.id, r.target, ", ".join(r.addresses), r.text) for r in a.recommendations]))

    vrows = []
    for sid in sorted(verdicts or {}):
        for v in verdicts[sid]:
            vrows.append((sid, str(v.spec), _observed(v), str(v.population), v.outcome))
    lines = _table(("scenario", "measure", "observed", "population", "outcome"), vrows)
    if summaries:
        lines.append("")
        lines.extend(_table(
            ("scenario", "measure", "windows", "failed", "streak", "first fail", "last fail", "persistent"),
            [(s.scenario, str(s.spec), str(s.windows_evaluated), str(s.windows_failed),
              str(s.consecutive_failures),
              format_ts(s.first_fail_ts) if s.first_fail_ts is not None else "-",
              format_ts(s.last_fail_ts) if s.last_fail_ts is not None else "-",
              "yes" if s.persistent else "no") for s in summaries]))
    section("Runtime verdicts", lines)

    section("Audit", _table(
        ("scenario", "trigger", "old band", "new band", "old score", "new score"),
        [(e.scenario, e.trigger, e.old_band, e.new_band, e.old_score, e.new_score) for e in a.audit]))
    return "\n".join(out) + "\n"


def parse_report(text: str) -> dict[str, str]:
    """Split a rendered report into its sections, checking names and order."""
    lines = text.splitlines()
    if not lines or lines[0] != TITLE:
        raise ValidationError("report does not start with the report title")
    sections: dict[str, list[str]] = {}
    order: list[str] = []
    current = None
    for line in lines[1:]:
        if line.startswith("## "):
            current = line[3:]
            if current in sections:
                raise ValidationError(f"duplicate report section {current!r}")
            sections[current] = []
            order.append(current)
        elif current is not None:
            sections[current].append(line)
    if tuple(order) != SECTIONS:
        raise ValidationError(f"report sections out of order: {order}")
    return {k: "\n".join(v).strip("\n") for k, v in sections.items()}


def table_rows(body: str) -> list[list[str]]:
    """Data rows of the first table in a section body."""
    rows = []
    for line in body.splitlines():
        if not line.startswith("|"):
            if rows:
                break
            continue
        cells = re.split(r"(?<!\\)\|", line[1:-1])
        rows.append([c.strip().replace("\\|", "|") for c in cells])
    return rows[2:] if len(rows) >= 2 else []


def coverage_sidecar(ws) -> str:
    """Machine-readable coverage table for every revision, as JSON text."""
    bands = band_map(scenario_priorities(ws))
    payload = {"current": ws.current_architecture, "revisions": {}}
    for m in ws.architectures:
        results, risks = gap_analysis(ws.scenarios, m, bands)
        payload["revisions"][m.name] = {
            c.scenario: {
                "quality": c.quality,
                "coverage": c.level,
                "approaches": list(c.approaches),
                "untouched": list(c.untouched),
            }
            for c in results
        }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
