import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from arceval.corpus import generate_mixed
from arceval.errors import ValidationError
from arceval.telemetry import (
    SpanRecord,
    WindowSpec,
    dumps,
    format_ts,
    ingest,
    parse_ts,
    record_from_json,
    record_to_json,
    sort_records,
    windows,
)

import generators
import oracles


def line(**kw):
    base = {"ts": "2025-01-01T00:00:00Z", "trace_id": "t1", "span_kind": "fm"}
    base.update(kw)
    return json.dumps(base)


def test_negative_latency_rejected():
    lines = [line(latency_ms=5), line(latency_ms=0), line(), line(latency_ms=-1)]
    accepted, rejected = ingest(lines)
    assert len(accepted) == 3
    assert rejected == [(4, "latency_ms < 0")]


def test_empty_input():
    assert ingest([]) == ([], [])


@pytest.mark.parametrize("bad, reason", [
    ('{"trace_id": "t", "span_kind": "fm"}', "missing ts"),
    (line(span_kind="nap"), "span_kind"),
    (line(ts="yesterday"), "ts"),
    ("not json", "json"),
    ("[1, 2]", "object"),
    (line(artefact="toaster"), "artefact"),
    (line(latency_ms="fast"), "latency_ms"),
])
def test_malformed_lines(bad, reason):
    accepted, rejected = ingest([bad])
    assert accepted == []
    assert len(rejected) == 1 and rejected[0][0] == 1
    assert reason in rejected[0][1].lower()


def test_blank_lines_skipped_and_order_preserved():
    lines = [line(ts=3000, trace_id="c"), "", line(ts=1000, trace_id="a")]
    accepted, rejected = ingest(lines)
    assert [r.trace_id for r in accepted] == ["c", "a"]
    assert rejected == []


def test_unknown_fields_kept_in_attrs():
    rec, = ingest([line(model="gpt-4o", cost=0.5)])[0]
    assert rec.attr("model") == "gpt-4o"
    assert rec.attr("cost") == "0.5"


def test_epoch_and_iso_timestamps_agree():
    assert parse_ts("2025-01-01T00:00:00Z") == parse_ts(1735689600000)
    assert format_ts(1735689600123) == "2025-01-01T00:00:00.123Z"


def test_ten_thousand_line_trace_ingests():
    records = generate_mixed(5)[:10_000]
    text = dumps(records)
    accepted, rejected = ingest(text.splitlines())
    assert rejected == []
    assert len(accepted) == 10_000
    assert accepted == records


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_record_roundtrip(seed):
    records = generators.records(random.Random(seed), 30)
    accepted, rejected = ingest(dumps(records).splitlines())
    assert rejected == [] and accepted == records
    for r in records:
        assert record_from_json(record_to_json(r)) == r


def test_count_windows_tile():
    recs = [SpanRecord(i, "t", "fm") for i in range(10)]
    ws = windows(recs, WindowSpec("count", 5, 5))
    assert [len(w) for w in ws] == [5, 5]
    assert ws[0][0].ts == 0 and ws[1][0].ts == 5


def test_duration_windows_overlap():
    recs = [SpanRecord(i * 10_000, "t", "fm") for i in range(10)]  # 0..90 s
    ws = windows(recs, WindowSpec("duration", 60, 30))
    assert len(ws) == 3
    assert [len(w) for w in ws] == [6, 6, 4]


@pytest.mark.parametrize("spec", [WindowSpec("count", 5, 1), WindowSpec("duration", 60, 7)])
def test_single_event_single_window(spec):
    assert windows([SpanRecord(42, "t", "fm")], spec) == [[SpanRecord(42, "t", "fm")]]


def test_invalid_window_specs():
    for args in (("count", 0), ("count", 5, 6), ("duration", -1), ("count", 2.5), ("tumbling", 5)):
        with pytest.raises(ValidationError):
            WindowSpec(*args)


def test_sort_is_stable():
    recs = [SpanRecord(5, "b", "fm"), SpanRecord(1, "a", "fm"), SpanRecord(5, "c", "fm")]
    assert [r.trace_id for r in sort_records(recs)] == ["a", "b", "c"]


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 200), st.integers(1, 40), st.integers(1, 40))
def test_count_windows_match_oracle_and_cover(seed, n, size, stride):
    stride = min(stride, size)
    recs = generators.records(random.Random(seed), n)
    got = windows(recs, WindowSpec("count", size, stride))
    ordered = sort_records(recs)
    assert got == [[ordered[i] for i in idx] for idx in oracles.count_windows(n, size, stride)]
    assert {id(r) for w in got for r in w} == {id(r) for r in recs}


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 120), st.integers(1, 7200), st.integers(1, 7200))
def test_duration_windows_match_oracle_and_cover(seed, n, size, stride):
    stride = min(stride, size)
    recs = generators.records(random.Random(seed), n)
    got = windows(recs, WindowSpec("duration", size, stride))
    ordered = sort_records(recs)
    expected = oracles.duration_windows([r.ts for r in ordered], size * 1000, stride * 1000)
    assert got == [[ordered[i] for i in idx] for idx in expected]
    assert {id(r) for w in got for r in w} == {id(r) for r in recs}


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_equal_timestamps_keep_input_order_in_windows(seed):
    rng = random.Random(seed)
    recs = [SpanRecord(rng.choice([0, 1000, 2000]), f"t{i}", "fm") for i in range(30)]
    for w in windows(recs, WindowSpec("count", 7, 3)) + windows(recs, WindowSpec("duration", 1.5, 1)):
        for a, b in zip(w, w[1:]):
            if a.ts == b.ts:
                assert int(a.trace_id[1:]) < int(b.trace_id[1:])
