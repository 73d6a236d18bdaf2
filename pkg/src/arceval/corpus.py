"""Luna tax copilot fixture corpus and a seeded synthetic telemetry generator."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace
from fractions import Fraction
from importlib import resources
from typing import Iterable

from arceval.dsl import Document, parse_document
from arceval.errors import ValidationError
from arceval.telemetry import SpanRecord, dumps, parse_ts

LUNA_FILES = ("governance.arc", "scenarios.arc", "architecture-pre.arc", "architecture-post.arc", "priorities.arc")
PRE = "luna-pre"
POST = "luna-post"

BASE_TS = parse_ts("2025-07-01T00:00:00Z")
HOUR_MS = 3_600_000


def luna_text(name: str) -> str:
    return resources.files("arceval").joinpath(f"fixtures/luna/{name}").read_text(encoding="utf-8")


def luna_document() -> Document:
    doc = Document()
    for name in LUNA_FILES:
        doc.extend(parse_document(luna_text(name), name))
    return doc


def luna_directory():
    """Path-like handle to the packaged corpus directory."""
    return resources.files("arceval").joinpath("fixtures/luna")


def luna_workspace():
    from arceval.workspace import load_workspace

    with resources.as_file(luna_directory()) as path:
        return load_workspace(path)


# -- generator ---------------------------------------------------------------

KINDS = ("tagged", "latency", "completeness", "resolve")


@dataclass(frozen=True)
class Profile:
    """One scenario's event mix.

    ``rate`` is the fraction of units that satisfy the scenario's measure:
    units carrying ``tag`` (tagged), answered under ``threshold`` ms
    (latency), logging every span kind (completeness), or resolved within
    ``threshold`` ms (resolve). ``extra`` adds further tags at fixed rates.
    """

    name: str
    scenario: str
    kind: str
    rate: float
    span_kind: str = "fm"
    artefact: str | None = None
    tag: str | None = None
    population: str | None = None
    threshold: int | None = None
    kinds: tuple[str, ...] = ()
    extra: tuple[tuple[str, float], ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValidationError(f"profile kind must be one of {', '.join(KINDS)}")
        for r in (self.rate, *(r for _, r in self.extra)):
            if isinstance(r, bool) or not (0 <= r <= 1):
                raise ValidationError(f"profile {self.name}: rate {r!r} outside [0, 1]")

    @property
    def events_per_unit(self) -> int:
        return {"completeness": len(self.kinds), "resolve": 2}.get(self.kind, 1)

    def with_rate(self, rate: float) -> "Profile":
        return replace(self, rate=rate)


PROFILES: dict[str, Profile] = {
    p.name: p
    for p in (
        Profile("accuracy-relevance", "luna-1", "tagged", 0.95, "fm", "generator", tag="relevant",
                extra=(("correct-reference", 1.0),)),
        Profile("accuracy-references", "luna-1", "tagged", 0.95, "fm", "generator", tag="correct-reference",
                extra=(("relevant", 1.0),)),
        Profile("adaptability", "luna-2", "tagged", 0.99, "feedback", "agent-memory", tag="update-correct",
                population="feedback-valid"),
        Profile("efficiency", "luna-3", "latency", 1.0, "fm", "generator", threshold=1000),
        Profile("transparency", "luna-4", "tagged", 0.95, "fm", "generator", tag="correct-reference"),
        Profile("observability", "luna-5", "completeness", 1.0, artefact="log-repository",
                kinds=("goal", "fm", "feedback")),
        Profile("contestability", "luna-6", "resolve", 1.0, artefact="generator", threshold=48 * HOUR_MS),
        Profile("privacy", "luna-7", "tagged", 0.99, "guardrail", "prompt-optimiser", tag="sensitive_filtered",
                population="sensitive"),
    )
}


def rounded(rate: float, n: int) -> int:
    """round(rate * n), halves away from zero, without float error."""
    return math.floor(Fraction(str(rate)) * n + Fraction(1, 2))


def _between(rng: random.Random, lo: int, hi: int) -> int:
    """Uniform integer in [lo, hi]; cheaper than randint for bulk generation."""
    return lo + int(rng.random() * (hi - lo + 1))


def _chosen(rng: random.Random, n: int, k: int) -> set[int]:
    return set(rng.sample(range(n), k))


def generate_records(
    profile: Profile,
    seed: int,
    n: int,
    *,
    hits: int | None = None,
    edge: bool = False,
    start_ms: int = BASE_TS,
) -> list[SpanRecord]:
    """Deterministic synthetic records for ``n`` units of ``profile``.

    Exactly ``hits`` units (default ``round(rate * n)``) satisfy the measure.
    With ``edge`` set, latencies and resolution times sit on the boundary: a
    satisfying unit lands exactly on the last passing value and a failing unit
    exactly on the first failing one.
    """
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ValidationError("n must be a positive integer")
    k = rounded(profile.rate, n) if hits is None else hits
    if not 0 <= k <= n:
        raise ValidationError(f"hits must lie in [0, {n}]")
    rng = random.Random(seed)
    good = _chosen(rng, n, k)
    extras = [(tag, _chosen(rng, n, rounded(rate, n))) for tag, rate in profile.extra]
    tags = (profile.scenario,)
    out: list[SpanRecord] = []
    ts = start_ms
    for i in range(n):
        ts += _between(rng, 200, 5000)
        trace = f"{profile.name}-{seed}-{i:06d}"
        ok = i in good
        if profile.kind == "tagged":
            outcome = [t for t, chosen in extras if i in chosen]
            if profile.population:
                outcome.append(profile.population)
            if ok:
                outcome.append(profile.tag)
            out.append(SpanRecord(ts, trace, profile.span_kind, tags, profile.artefact,
                                  float(_between(rng, 80, 900)), tuple(sorted(outcome))))
        elif profile.kind == "latency":
            limit = profile.threshold
            if edge:
                latency = limit - 1 if ok else limit
            else:
                latency = _between(rng, 40, limit - 1) if ok else _between(rng, limit, 4 * limit)
            out.append(SpanRecord(ts, trace, profile.span_kind, tags, profile.artefact, float(latency),
                                  ("cache-hit",)))
        elif profile.kind == "completeness":
            present = list(profile.kinds)
            if not ok:
                present.pop(rng.randrange(len(present)))
            for j, kind in enumerate(present):
                out.append(SpanRecord(ts + j, trace, kind, tags, profile.artefact))
        else:
            limit = profile.threshold
            if edge:
                delay = limit if ok else limit + 1
            else:
                delay = _between(rng, HOUR_MS, limit) if ok else _between(rng, limit + 1, 3 * limit)
            out.append(SpanRecord(ts, trace, "contest-opened", tags, profile.artefact))
            out.append(SpanRecord(ts + delay, trace, "contest-resolved", tags, profile.artefact))
    out.sort(key=lambda r: r.ts)
    return out


def generate_trace(profile: Profile | str, seed: int, n: int, **kwargs) -> str:
    """JSONL telemetry text for ``n`` units of a profile (by object or name)."""
    if isinstance(profile, str):
        try:
            profile = PROFILES[profile]
        except KeyError:
            raise ValidationError(f"unknown profile {profile!r}") from None
    return dumps(generate_records(profile, seed, n, **kwargs))


def generate_mixed(seed: int, segments: int = 10, units: int = 100,
                   degraded: Iterable[str] = ("efficiency", "observability")) -> list[SpanRecord]:
    """A multi-scenario replay trace: every profile per segment, with the
    ``degraded`` profiles dropping below threshold in the second half."""
    degraded = set(degraded)
    records: list[SpanRecord] = []
    for s in range(segments):
        start = BASE_TS + s * 24 * HOUR_MS
        for i, (name, profile) in enumerate(sorted(PROFILES.items())):
            p = profile
            if name in degraded and s >= segments // 2:
                p = profile.with_rate(max(0.0, profile.rate - 0.05))
            records.extend(generate_records(p, seed * 1000 + s * 31 + i, units, start_ms=start))
    records.sort(key=lambda r: r.ts)
    return records
