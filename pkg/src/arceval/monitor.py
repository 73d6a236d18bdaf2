"""Replay telemetry through scenario measures and detect persistent violations."""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

from arceval.errors import ValidationError
from arceval.measures import FAIL, INSUFFICIENT, MeasureSpec, MeasureVerdict, evaluate, format_number
from arceval.model import AnalysisLedger, AuditEntry, ContextScenario
from arceval.prioritiser import DEFAULT_WEIGHTS, PriorityResult, format_score, reprioritise
from arceval.telemetry import SpanRecord, WindowSpec, format_ts, in_scope, sort_records, windows

DEFAULT_PERSISTENCE = 3

NOTICE = "notice"
VIOLATION = "violation"
PERSISTENT = "persistent-violation"

EXIT_OK = 0
EXIT_VIOLATIONS = 3
EXIT_PERSISTENT = 4


@dataclass(frozen=True)
class ViolationSummary:
    scenario: str
    spec: MeasureSpec
    windows_evaluated: int
    windows_failed: int
    consecutive_failures: int
    first_fail_ts: int | None
    last_fail_ts: int | None
    persistent: bool


@dataclass(frozen=True)
class Alert:
    ts: int
    scenario: str
    verdict: MeasureVerdict
    severity: str

    def to_json(self) -> dict:
        observed = self.verdict.observed
        return {
            "ts": format_ts(self.ts),
            "scenario": self.scenario,
            "measure": str(self.verdict.spec),
            "observed": None if observed is None else float(format_number(observed)),
            "severity": self.severity,
        }


@dataclass(frozen=True)
class Trigger:
    scenario: str
    measure: str
    ts: int

    def __str__(self) -> str:
        return f"persistent violation of {self.measure} at {format_ts(self.ts)}"


@dataclass(frozen=True)
class MonitorResult:
    alerts: tuple[Alert, ...]
    summaries: tuple[ViolationSummary, ...]
    triggers: tuple[Trigger, ...]

    @property
    def exit_code(self) -> int:
        if any(s.persistent for s in self.summaries):
            return EXIT_PERSISTENT
        if any(s.windows_failed for s in self.summaries):
            return EXIT_VIOLATIONS
        return EXIT_OK

    def alert_lines(self) -> str:
        return "".join(json.dumps(a.to_json(), sort_keys=False) + "\n" for a in self.alerts)


def streaks(outcomes: Iterable[str]) -> tuple[list[int], int]:
    """Running failure streak after each outcome, and the longest streak.

    Insufficient-data leaves the streak untouched; a pass resets it.
    """
    current = 0
    longest = 0
    running = []
    for outcome in outcomes:
        if outcome == FAIL:
            current += 1
        elif outcome != INSUFFICIENT:
            current = 0
        longest = max(longest, current)
        running.append(current)
    return running, longest


def _measure_run(scenario: ContextScenario, spec: MeasureSpec, scoped: Sequence[SpanRecord],
                 window: WindowSpec, persistence_n: int, min_population: int, low_band: bool):
    chunks = windows(scoped, spec.window or window)
    bare = replace(spec, window=None)
    outcomes = []
    verdicts = []
    for chunk in chunks:
        v = evaluate(bare, chunk, None, (), min_population)
        verdicts.append(replace(v, spec=spec))
        outcomes.append(v.outcome)
    running, longest = streaks(outcomes)
    alerts: list[Alert] = []
    fail_ts: list[int] = []
    trigger = None
    for chunk, verdict, streak in zip(chunks, verdicts, running):
        if verdict.outcome != FAIL:
            continue
        # an empty duration window cannot fail: failing needs observations
        ts = chunk[-1].ts
        fail_ts.append(ts)
        if streak >= persistence_n:
            severity = PERSISTENT
            if trigger is None:
                trigger = Trigger(scenario.id, str(spec), ts)
        elif low_band:
            severity = NOTICE
        else:
            severity = VIOLATION
        alerts.append(Alert(ts, scenario.id, verdict, severity))
    summary = ViolationSummary(
        scenario=scenario.id,
        spec=spec,
        windows_evaluated=len(chunks),
        windows_failed=len(fail_ts),
        consecutive_failures=longest,
        first_fail_ts=fail_ts[0] if fail_ts else None,
        last_fail_ts=fail_ts[-1] if fail_ts else None,
        persistent=longest >= persistence_n,
    )
    return alerts, summary, trigger


def run_monitor(
    scenarios: Iterable[ContextScenario],
    records: Iterable[SpanRecord],
    window: WindowSpec,
    persistence_n: int = DEFAULT_PERSISTENCE,
    bands: Mapping[str, str] | None = None,
    min_population: int = 1,
) -> MonitorResult:
    """Evaluate every machine measure of every scenario over sliding windows.

    Records are scoped to each scenario before windowing; a measure's own
    window replaces ``window``. ``bands`` maps scenario id to its priority band;
    failures of low-band scenarios alert as notices until they persist.
    """
    if not isinstance(window, WindowSpec):
        raise ValidationError("window must be a WindowSpec")
    if isinstance(persistence_n, bool) or not isinstance(persistence_n, int) or persistence_n < 1:
        raise ValidationError("persistence must be a positive integer")
    bands = dict(bands or {})
    ordered = sort_records(records)
    streams: list[list[Alert]] = []
    summaries: list[ViolationSummary] = []
    triggers: list[Trigger] = []
    for scenario in sorted(scenarios, key=lambda s: s.id):
        scoped = [r for r in ordered if in_scope(r, scenario.id, scenario.artefacts)]
        band = bands.get(scenario.id, scenario.priority)
        for spec in scenario.measures:
            if not spec.machine:
                continue
            alerts, summary, trigger = _measure_run(
                scenario, spec, scoped, window, persistence_n, min_population, band == "low")
            streams.append(alerts)
            summaries.append(summary)
            if trigger is not None:
                triggers.append(trigger)
    merged = list(heapq.merge(*streams, key=lambda a: a.ts))
    return MonitorResult(tuple(merged), tuple(summaries), tuple(triggers))


def feed_reprioritiser(
    triggers: Iterable[Trigger | str],
    priorities: Sequence[PriorityResult],
    ledger: AnalysisLedger | None = None,
    weights: Sequence[float] = DEFAULT_WEIGHTS,
) -> tuple[list[PriorityResult], AnalysisLedger]:
    """Apply persistent-violation triggers to priorities and audit the change.

    Duplicate triggers for one scenario yield one audit entry; the first
    trigger's description is recorded.
    """
    ledger = ledger or AnalysisLedger()
    first: dict[str, str] = {}
    for t in triggers:
        sid = t if isinstance(t, str) else t.scenario
        first.setdefault(sid, sid if isinstance(t, str) else str(t))
    known = {p.scenario for p in priorities}
    for sid in first:
        if sid not in known:
            raise ValidationError(f"trigger references unknown scenario {sid!r}")
    if not first:
        return list(priorities), ledger
    updated = reprioritise(priorities, list(first), weights)
    before = {p.scenario: p for p in priorities}
    after = {p.scenario: p for p in updated}
    entries = tuple(
        AuditEntry(sid, first[sid], before[sid].band, after[sid].band,
                   format_score(before[sid].score), format_score(after[sid].score))
        for sid in first
    )
    return updated, replace(ledger, audit=ledger.audit + entries)
