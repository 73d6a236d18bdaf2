"""Response-measure expressions and their evaluation over telemetry.

Grammar::

    measure    := metric "(" [arg ("," arg)*] ")" [comparator NUMBER [UNIT]] [window]
    comparator := "<" | "<=" | ">" | ">=" | "=="
    UNIT       := "ratio" | "ms" | "s" | "h" | "count"
    window     := "over" "window" "(" NUMBER ("events" | "s" | "h") ")"

Metric kinds:

``ratio(tag[, population-tag])``
    fraction of in-scope events whose outcome tags contain ``tag``; with a
    population tag only events carrying it are counted.
``latency_pct(p)``
    nearest-rank p-th percentile of ``latency_ms`` (0 < p <= 100).
``max_latency()``
    largest ``latency_ms``; same as ``latency_pct(100)``.
``completeness(kind, ...)``
    mean fraction of the listed span kinds present per trace id.
``resolve_within(open, close[, required])``
    the threshold is a duration; observed is the fraction of open events with
    a close event on the same trace no later than the deadline. Passes when
    that fraction reaches ``required`` (default 1).
``count(tag)``
    number of in-scope events carrying ``tag``.
``judged(name)``
    human-judged; evaluated only from a recorded external assessment.

The comparator is mandatory except for ``judged``.
"""

from __future__ import annotations

import math
import re
from bisect import bisect_left, bisect_right
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from arceval.errors import MeasureError, SourceSpan
from arceval.telemetry import SpanRecord, WindowSpec, in_scope, sort_records
from arceval.vocab import SPAN_KINDS, is_label

COMPARATORS = ("<", "<=", ">", ">=", "==")
UNITS = ("ratio", "ms", "s", "h", "count")
METRICS = (
    "ratio",
    "latency_pct",
    "max_latency",
    "completeness",
    "resolve_within",
    "count",
    "judged",
)

# metric -> (allowed units, default unit or None when a unit is required)
_UNIT_RULES: dict[str, tuple[tuple[str, ...], str | None]] = {
    "ratio": (("ratio",), "ratio"),
    "completeness": (("ratio",), "ratio"),
    "judged": (("ratio",), "ratio"),
    "latency_pct": (("ms", "s"), None),
    "max_latency": (("ms", "s"), None),
    "resolve_within": (("s", "h"), None),
    "count": (("count",), "count"),
}

_UNIT_TO_MS = {"ms": 1, "s": 1000, "h": 3_600_000}

PASS = "pass"
FAIL = "fail"
INSUFFICIENT = "insufficient-data"


@dataclass(frozen=True)
class MeasureSpec:
    metric: str
    args: tuple = ()
    comparator: str | None = None
    threshold: float | None = None
    unit: str | None = None
    window: WindowSpec | None = None

    @property
    def machine(self) -> bool:
        return self.metric != "judged"

    @property
    def threshold_base(self) -> float | None:
        """Threshold in the metric's base unit (ms for durations)."""
        if self.threshold is None:
            return None
        # decimal-exact so "0.57 s" is exactly 570 ms
        return float(Fraction(str(self.threshold)) * _UNIT_TO_MS.get(self.unit, 1))

    def __str__(self) -> str:
        return format_measure(self)


@dataclass(frozen=True)
class MeasureVerdict:
    spec: MeasureSpec
    observed: float | None
    population: int
    outcome: str

    @property
    def passed(self) -> bool:
        return self.outcome == PASS


def format_number(value: float) -> str:
    if isinstance(value, bool):
        raise TypeError("boolean is not a number")
    if isinstance(value, int):
        return str(value)
    if value == int(value) and abs(value) < 1e15:
        return repr(float(value))
    return repr(value)


def format_measure(spec: MeasureSpec) -> str:
    args = ", ".join(a if isinstance(a, str) else format_number(a) for a in spec.args)
    text = f"{spec.metric}({args})"
    if spec.comparator is not None:
        text += f" {spec.comparator} {format_number(spec.threshold)}"
        if spec.unit is not None and _UNIT_RULES[spec.metric][1] != spec.unit:
            text += f" {spec.unit}"
    if spec.window is not None:
        w = spec.window
        if w.mode == "count":
            text += f" over window({int(w.size)} events)"
        else:
            text += f" over window({format_number(w.size)} s)"
    return text


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<op><=|>=|==|<|>)
  | (?P<punct>[(),])
  | (?P<word>[A-Za-z_][A-Za-z0-9_-]*)
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise MeasureError(f"unexpected character {text[pos]!r} in measure", _col(pos))
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    return tokens


def _col(pos: int) -> SourceSpan:
    return SourceSpan("<measure>", 1, pos + 1)


def _number(tok: str) -> float:
    if re.fullmatch(r"-?\d+", tok):
        return int(tok)
    return float(tok)


class _MeasureParser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def error(self, message: str, at: int | None = None) -> MeasureError:
        if at is None:
            tok = self.peek()
            at = tok[2] if tok else len(self.text)
        return MeasureError(message, _col(at))

    def take(self, kind: str | None = None, value: str | None = None) -> tuple[str, str, int]:
        tok = self.peek()
        want = value or kind
        if tok is None:
            raise self.error(f"expected {want}, found end of measure")
        if (kind and tok[0] != kind) or (value and tok[1] != value):
            raise self.error(f"expected {want}, found {tok[1]!r}")
        self.i += 1
        return tok

    def parse(self) -> MeasureSpec:
        if not self.tokens:
            raise self.error("empty measure")
        _, metric, metric_pos = self.take("word")
        if metric not in METRICS:
            raise self.error(f"unknown metric {metric!r}", metric_pos)
        self.take(value="(")
        args: list = []
        arg_pos: list[int] = []
        if not (self.peek() and self.peek()[1] == ")"):
            while True:
                tok = self.peek()
                if tok is None or tok[0] not in ("word", "num"):
                    raise self.error("expected measure argument")
                self.i += 1
                args.append(tok[1] if tok[0] == "word" else _number(tok[1]))
                arg_pos.append(tok[2])
                if self.peek() and self.peek()[1] == ",":
                    self.i += 1
                    continue
                break
        self.take(value=")")
        comparator = threshold = unit = None
        positions: dict[str, int] = {}
        tok = self.peek()
        if tok and tok[0] == "op":
            self.i += 1
            comparator = tok[1]
            positions["comparator"] = tok[2]
            num_tok = self.take("num")
            threshold = _number(num_tok[1])
            positions["threshold"] = num_tok[2]
            tok = self.peek()
            if tok and tok[0] == "word" and tok[1] in UNITS:
                self.i += 1
                unit = tok[1]
                positions["unit"] = tok[2]
            elif tok and tok[0] == "word" and tok[1] != "over":
                raise self.error(f"unknown unit {tok[1]!r}")
        window = None
        tok = self.peek()
        if tok and tok[1] == "over":
            self.i += 1
            window = self._window()
        if self.peek() is not None:
            raise self.error(f"unexpected {self.peek()[1]!r} after measure")
        return _check(metric, args, arg_pos, comparator, threshold, unit, window, metric_pos, self, positions)

    def _window(self) -> WindowSpec:
        self.take(value="window")
        self.take(value="(")
        size_tok = self.take("num")
        size = _number(size_tok[1])
        unit_tok = self.take("word")
        self.take(value=")")
        if size <= 0:
            raise self.error("window size must be positive", size_tok[2])
        if unit_tok[1] == "events":
            if size != int(size):
                raise self.error("event window size must be whole", size_tok[2])
            return WindowSpec("count", int(size))
        if unit_tok[1] == "s":
            return WindowSpec("duration", size)
        if unit_tok[1] == "h":
            return WindowSpec("duration", size * 3600)
        raise self.error(f"window unit must be events, s or h, got {unit_tok[1]!r}", unit_tok[2])


def _check(metric, args, arg_pos, comparator, threshold, unit, window, metric_pos, p, at) -> MeasureSpec:
    def need_labels(n_min: int, n_max: int | None) -> None:
        if len(args) < n_min or (n_max is not None and len(args) > n_max):
            raise p.error(f"{metric} takes {n_min}" + (f"-{n_max}" if n_max != n_min else "") + " argument(s)", metric_pos)
        for a, pos in zip(args, arg_pos):
            if not is_label(a):
                raise p.error(f"{metric} argument {a!r} must be a label", pos)

    if metric == "ratio":
        need_labels(1, 2)
    elif metric in ("count", "judged"):
        need_labels(1, 1)
    elif metric == "max_latency":
        if args:
            raise p.error("max_latency takes no arguments", metric_pos)
    elif metric == "latency_pct":
        if len(args) != 1 or isinstance(args[0], str):
            raise p.error("latency_pct takes one numeric percentile", metric_pos)
        if not 0 < args[0] <= 100:
            raise p.error("percentile must lie in (0, 100]", arg_pos[0])
    elif metric == "completeness":
        if not args:
            raise p.error("completeness needs at least one span kind", metric_pos)
        for a, pos in zip(args, arg_pos):
            if a not in SPAN_KINDS:
                raise p.error(f"unknown span kind {a!r}", pos)
        if len(set(args)) != len(args):
            raise p.error("completeness span kinds must be distinct", metric_pos)
    elif metric == "resolve_within":
        if len(args) not in (2, 3):
            raise p.error("resolve_within takes open and close tags and an optional required fraction", metric_pos)
        for a, pos in zip(args[:2], arg_pos[:2]):
            if not is_label(a):
                raise p.error(f"resolve_within argument {a!r} must be a label", pos)
        if len(args) == 3 and (isinstance(args[2], str) or not 0 <= args[2] <= 1):
            raise p.error("required fraction must lie in [0, 1]", arg_pos[2])

    if comparator is None:
        if metric != "judged":
            raise p.error(f"{metric} needs a comparator and threshold")
        return MeasureSpec(metric, tuple(args), None, None, None, window)

    allowed, default = _UNIT_RULES[metric]
    if unit is None:
        if default is None:
            raise p.error(f"{metric} threshold needs a unit ({' or '.join(allowed)})", at["threshold"])
        unit = default
    if unit not in allowed:
        raise p.error(f"unit {unit} incompatible with {metric} (expected {' or '.join(allowed)})",
                      at.get("unit", at["threshold"]))
    if unit == "ratio" and not 0 <= threshold <= 1:
        raise p.error("ratio threshold must lie in [0,1]", at["threshold"])
    if threshold < 0:
        raise p.error("threshold must be non-negative", at["threshold"])
    if metric == "resolve_within" and comparator not in ("<", "<="):
        raise p.error("resolve_within deadline comparator must be < or <=", at["comparator"])
    return MeasureSpec(metric, tuple(args), comparator, threshold, unit, window)


def parse_measure(text: str) -> MeasureSpec:
    """Parse a measure expression; errors carry a column within ``text``."""
    return _MeasureParser(text).parse()


def compare(observed: float, comparator: str, threshold: float) -> bool:
    if comparator == "<":
        return observed < threshold
    if comparator == "<=":
        return observed <= threshold
    if comparator == ">":
        return observed > threshold
    if comparator == ">=":
        return observed >= threshold
    if comparator == "==":
        return observed == threshold
    raise ValueError(f"unknown comparator {comparator!r}")


def nearest_rank(values: Sequence[float], p: float) -> float:
    """Nearest-rank percentile: the ceil(p/100 * n)-th smallest value."""
    ordered = sorted(values)
    rank = math.ceil(Fraction(str(p)) * len(ordered) / 100)
    return ordered[max(rank, 1) - 1]


def _trailing(events: Sequence[SpanRecord], window: WindowSpec) -> list[SpanRecord]:
    if not events:
        return []
    if window.mode == "count":
        return list(events[-int(window.size):])
    cutoff = events[-1].ts - window.size * 1000
    return [e for e in events if e.ts > cutoff]


def _resolved_fraction(events: Sequence[SpanRecord], open_tag: str, close_tag: str,
                       comparator: str, deadline_ms: float) -> tuple[int, int]:
    closes: dict[str, list[int]] = defaultdict(list)
    opens: list[SpanRecord] = []
    for e in events:
        if e.matches(open_tag):
            opens.append(e)
        if e.matches(close_tag):
            closes[e.trace_id].append(e.ts)
    for ts_list in closes.values():
        ts_list.sort()
    resolved = 0
    for o in opens:
        ts_list = closes.get(o.trace_id, [])
        lo = bisect_left(ts_list, o.ts)
        if comparator == "<=":
            hi = bisect_right(ts_list, o.ts + deadline_ms)
        else:
            hi = bisect_left(ts_list, o.ts + deadline_ms)
        if hi > lo:
            resolved += 1
    return resolved, len(opens)


def evaluate(
    spec: MeasureSpec,
    events: Sequence[SpanRecord],
    scope: str | None = None,
    artefacts: Iterable[str] = (),
    min_population: int = 1,
) -> MeasureVerdict:
    """Evaluate a machine measure over time-ordered events.

    Only events in scope for ``scope`` (a scenario id) are considered. A
    measure-level window restricts evaluation to the trailing window of the
    in-scope events. Populations below ``min_population`` give
    insufficient-data with no observed value.
    """
    if not spec.machine:
        raise ValueError("human-judged measures are evaluated from assessments")
    artefacts = tuple(artefacts)
    scoped = [e for e in sort_records(events) if in_scope(e, scope, artefacts)]
    if spec.window is not None:
        scoped = _trailing(scoped, spec.window)

    metric = spec.metric
    threshold = spec.threshold_base
    if metric == "ratio":
        tag = spec.args[0]
        population = [e for e in scoped if len(spec.args) < 2 or e.has_tag(spec.args[1])]
        n = len(population)
        if n < min_population or n == 0:
            return MeasureVerdict(spec, None, n, INSUFFICIENT)
        observed = sum(1 for e in population if e.has_tag(tag)) / n
        ok = compare(observed, spec.comparator, threshold)
    elif metric == "count":
        n = len(scoped)
        if n < min_population:
            return MeasureVerdict(spec, None, n, INSUFFICIENT)
        observed = sum(1 for e in scoped if e.has_tag(spec.args[0]))
        ok = compare(observed, spec.comparator, threshold)
    elif metric in ("latency_pct", "max_latency"):
        latencies = [e.latency_ms for e in scoped if e.latency_ms is not None]
        n = len(latencies)
        if n < min_population or n == 0:
            return MeasureVerdict(spec, None, n, INSUFFICIENT)
        p = spec.args[0] if metric == "latency_pct" else 100
        value_ms = nearest_rank(latencies, p)
        ok = compare(value_ms, spec.comparator, threshold)
        observed = value_ms / _UNIT_TO_MS[spec.unit]
    elif metric == "completeness":
        kinds = set(spec.args)
        present: dict[str, set[str]] = defaultdict(set)
        for e in scoped:
            present[e.trace_id].add(e.span_kind)
        n = len(present)
        if n < min_population or n == 0:
            return MeasureVerdict(spec, None, n, INSUFFICIENT)
        total = sum(len(kinds & seen) for seen in present.values())
        observed = total / (n * len(kinds))
        ok = compare(observed, spec.comparator, threshold)
    elif metric == "resolve_within":
        resolved, n = _resolved_fraction(scoped, spec.args[0], spec.args[1], spec.comparator, threshold)
        if n < min_population or n == 0:
            return MeasureVerdict(spec, None, n, INSUFFICIENT)
        required = spec.args[2] if len(spec.args) == 3 else 1
        observed = resolved / n
        ok = observed >= required
    else:  # pragma: no cover - guarded by the parser
        raise ValueError(f"unknown metric {metric}")
    return MeasureVerdict(spec, observed, n, PASS if ok else FAIL)


def evaluate_scenario(
    scenario,
    events: Sequence[SpanRecord],
    assessments: Mapping[str, bool] | Iterable | None = None,
    min_population: int = 1,
) -> list[MeasureVerdict]:
    """One verdict per machine measure, then one per external assessment.

    ``assessments`` (name -> pass, or assessment records) supplements the
    scenario's own recorded assessments and wins on name clashes. A judged
    measure with no matching assessment is insufficient-data.
    """
    recorded: dict[str, bool] = {a.name: a.passed for a in scenario.external_assessments}
    if assessments is not None:
        if isinstance(assessments, Mapping):
            recorded.update({k: bool(v) for k, v in assessments.items()})
        else:
            recorded.update({a.name: a.passed for a in assessments})
    verdicts: list[MeasureVerdict] = []
    bound: set[str] = set()
    for spec in scenario.measures:
        if spec.machine:
            verdicts.append(evaluate(spec, events, scenario.id, scenario.artefacts, min_population))
            continue
        name = spec.args[0]
        bound.add(name)
        if name in recorded:
            verdicts.append(MeasureVerdict(spec, None, 1, PASS if recorded[name] else FAIL))
        else:
            verdicts.append(MeasureVerdict(spec, None, 0, INSUFFICIENT))
    for name, passed in recorded.items():
        if name not in bound:
            verdicts.append(MeasureVerdict(MeasureSpec("judged", (name,)), None, 1, PASS if passed else FAIL))
    return verdicts


def scenario_outcome(verdicts: Sequence[MeasureVerdict]) -> str:
    """pass iff every verdict passes; any fail wins over insufficient-data."""
    if not verdicts:
        return INSUFFICIENT
    outcomes = {v.outcome for v in verdicts}
    if FAIL in outcomes:
        return FAIL
    if INSUFFICIENT in outcomes:
        return INSUFFICIENT
    return PASS
