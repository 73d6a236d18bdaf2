"""Agent runtime span records: JSONL ingestion, validation and windowing.

Wire format is one JSON object per line::

    {"ts": "2025-07-01T09:00:00.000Z", "trace_id": "t-1", "span_kind": "fm",
     "scenario_tags": ["luna-1"], "artefact": "generator", "latency_ms": 412,
     "outcome_tags": ["relevant"], "attrs": {"model": "gpt-4o"}}

``ts`` may also be given as integer epoch milliseconds. Fields outside the
record schema are kept as text in ``attrs``.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Iterator, Sequence

from arceval.errors import ValidationError, VocabularyError
from arceval.vocab import SPAN_KINDS, is_label, parse_artefact

logger = logging.getLogger(__name__)

_FIELDS = (
    "ts",
    "trace_id",
    "span_kind",
    "scenario_tags",
    "artefact",
    "latency_ms",
    "outcome_tags",
    "attrs",
)


@dataclass(frozen=True)
class SpanRecord:
    ts: int  # epoch milliseconds, UTC
    trace_id: str
    span_kind: str
    scenario_tags: tuple[str, ...] = ()
    artefact: str | None = None
    latency_ms: float | None = None
    outcome_tags: tuple[str, ...] = ()
    attrs: tuple[tuple[str, str], ...] = field(default=())

    def has_tag(self, tag: str) -> bool:
        return tag in self.outcome_tags

    def matches(self, tag: str) -> bool:
        """Span kind or outcome tag equals ``tag``."""
        return self.span_kind == tag or tag in self.outcome_tags

    def attr(self, key: str, default: str | None = None) -> str | None:
        return dict(self.attrs).get(key, default)


@dataclass(frozen=True)
class WindowSpec:
    """Count windows measure ``size`` in events, duration windows in seconds."""

    mode: str
    size: float
    stride: float | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("count", "duration"):
            raise ValidationError(f"window mode must be count or duration, got {self.mode!r}")
        if self.stride is None:
            object.__setattr__(self, "stride", self.size)
        if not (self.size > 0 and math.isfinite(self.size)):
            raise ValidationError("window size must be positive")
        if not (self.stride > 0 and math.isfinite(self.stride)):
            raise ValidationError("window stride must be positive")
        if self.stride > self.size:
            raise ValidationError("window stride must not exceed size")
        if self.mode == "count" and (self.size != int(self.size) or self.stride != int(self.stride)):
            raise ValidationError("count windows need whole-event size and stride")


def parse_ts(value: object) -> int:
    """Return epoch milliseconds for an ISO-8601 string or a numeric epoch-ms value."""
    if isinstance(value, bool):
        raise ValueError("ts must be a timestamp")
    if isinstance(value, (int, float)):
        if not math.isfinite(value):
            raise ValueError("ts not finite")
        return int(round(value))
    if isinstance(value, str):
        text = value.strip()
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        dt = datetime.fromisoformat(text)
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        delta = dt - datetime(1970, 1, 1, tzinfo=timezone.utc)
        return (delta.days * 86_400 + delta.seconds) * 1000 + delta.microseconds // 1000
    raise ValueError("ts must be a string or number")


def format_ts(ms: int) -> str:
    dt = datetime.fromtimestamp(ms // 1000, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S") + f".{ms % 1000:03d}Z"


def _text_list(value: object, name: str, labels: bool) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ValueError(f"{name} must be a list of strings")
    if labels:
        for v in value:
            if not is_label(v):
                raise ValueError(f"{name} entry {v!r} is not a label")
    return tuple(value)


def _attr_text(value: object) -> str:
    if isinstance(value, str):
        return value
    return json.dumps(value, sort_keys=True, separators=(",", ":"))


def record_from_json(obj: object) -> SpanRecord:
    """Build a record from a decoded JSON object; raises ValueError with a reason."""
    if not isinstance(obj, dict):
        raise ValueError("record is not a JSON object")
    if "ts" not in obj or obj["ts"] is None:
        raise ValueError("missing ts")
    try:
        ts = parse_ts(obj["ts"])
    except (ValueError, OverflowError) as exc:
        raise ValueError(f"bad ts: {exc}") from None
    trace_id = obj.get("trace_id")
    if not isinstance(trace_id, str) or not trace_id:
        raise ValueError("missing trace_id")
    kind = obj.get("span_kind")
    if kind not in SPAN_KINDS:
        raise ValueError(f"unknown span_kind {kind!r}")
    artefact = obj.get("artefact")
    if artefact is not None:
        try:
            parse_artefact(artefact)
        except VocabularyError as exc:
            raise ValueError(str(exc)) from None
    latency = obj.get("latency_ms")
    if latency is not None:
        if isinstance(latency, bool) or not isinstance(latency, (int, float)):
            raise ValueError("latency_ms not a number")
        if not math.isfinite(latency):
            raise ValueError("latency_ms not finite")
        if latency < 0:
            raise ValueError("latency_ms < 0")
    attrs_obj = obj.get("attrs", {})
    if not isinstance(attrs_obj, dict):
        raise ValueError("attrs must be an object")
    attrs = {str(k): _attr_text(v) for k, v in attrs_obj.items()}
    for key, value in obj.items():
        if key not in _FIELDS:
            attrs[key] = _attr_text(value)
    return SpanRecord(
        ts=ts,
        trace_id=trace_id,
        span_kind=kind,
        scenario_tags=_text_list(obj.get("scenario_tags", []), "scenario_tags", labels=False),
        artefact=artefact,
        latency_ms=latency,
        outcome_tags=_text_list(obj.get("outcome_tags", []), "outcome_tags", labels=True),
        attrs=tuple(sorted(attrs.items())),
    )


def record_to_json(rec: SpanRecord) -> dict:
    obj: dict = {
        "ts": format_ts(rec.ts),
        "trace_id": rec.trace_id,
        "span_kind": rec.span_kind,
        "scenario_tags": list(rec.scenario_tags),
    }
    if rec.artefact is not None:
        obj["artefact"] = rec.artefact
    if rec.latency_ms is not None:
        obj["latency_ms"] = rec.latency_ms
    obj["outcome_tags"] = list(rec.outcome_tags)
    if rec.attrs:
        obj["attrs"] = dict(rec.attrs)
    return obj


def dumps(records: Iterable[SpanRecord]) -> str:
    """Serialise records to JSONL text (one record per line, trailing newline)."""
    return "".join(
        json.dumps(record_to_json(r), ensure_ascii=False, separators=(",", ":")) + "\n"
        for r in records
    )


def ingest(lines: Iterable[str]) -> tuple[list[SpanRecord], list[tuple[int, str]]]:
    """Parse JSONL lines into records.

    Malformed lines never abort ingestion; each is reported as
    ``(line_number, reason)``. Blank lines are skipped. Input order is kept.
    """
    accepted: list[SpanRecord] = []
    rejected: list[tuple[int, str]] = []
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            rejected.append((lineno, f"invalid JSON: {exc.msg}"))
            continue
        try:
            accepted.append(record_from_json(obj))
        except ValueError as exc:
            rejected.append((lineno, str(exc)))
    if rejected:
        logger.warning("rejected %d telemetry line(s)", len(rejected))
    return accepted, rejected


def sort_records(records: Iterable[SpanRecord]) -> list[SpanRecord]:
    # sorted() is stable, so equal timestamps keep input order
    return sorted(records, key=lambda r: r.ts)


def windows(records: Sequence[SpanRecord], spec: WindowSpec) -> list[list[SpanRecord]]:
    """Split time-sorted records into (possibly overlapping) windows.

    Count windows start every ``stride`` events; duration windows cover
    ``[start, start + size)`` starting at the first timestamp and advancing by
    ``stride`` seconds. Windows are produced until one reaches the last record,
    so every record lands in at least one window.
    """
    ordered = sort_records(records)
    if not ordered:
        return []
    out: list[list[SpanRecord]] = []
    if spec.mode == "count":
        size, stride = int(spec.size), int(spec.stride)
        start = 0
        while True:
            out.append(ordered[start : start + size])
            if start + size >= len(ordered):
                break
            start += stride
        return out
    size_ms = spec.size * 1000
    stride_ms = spec.stride * 1000
    t0, t_last = ordered[0].ts, ordered[-1].ts
    k = 0
    lo = 0
    while True:
        start = t0 + k * stride_ms
        end = start + size_ms
        while lo < len(ordered) and ordered[lo].ts < start:
            lo += 1
        hi = lo
        while hi < len(ordered) and ordered[hi].ts < end:
            hi += 1
        out.append(ordered[lo:hi])
        if end > t_last:
            break
        k += 1
    return out


def in_scope(record: SpanRecord, scenario_id: str | None, artefacts: Iterable[str] = ()) -> bool:
    """Scenario scoping: explicit scenario tags win; otherwise match on artefact."""
    if scenario_id is None:
        return True
    if record.scenario_tags:
        return scenario_id in record.scenario_tags
    return record.artefact is not None and record.artefact in set(artefacts)


def read_lines(source: str) -> Iterator[str]:
    """Yield lines from a path, or from standard input when ``source`` is ``-``."""
    import sys

    if source == "-":
        yield from sys.stdin
        return
    with open(source, encoding="utf-8") as fh:
        yield from fh
