"""Scenario prioritisation from stakeholder scores, and runtime reprioritisation.

Each stakeholder scores impact, risk and relevance on a 1-5 rubric. A
scenario's score is the weighted mean of the per-component stakeholder means,
kept as an exact fraction so band cut-offs never suffer rounding.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from arceval.errors import ValidationError
from arceval.model import PriorityInput
from arceval.vocab import BANDS

HIGH_CUTOFF = Fraction(4)
MEDIUM_CUTOFF = Fraction(5, 2)
DEFAULT_WEIGHTS = (1, 1, 1)


@dataclass(frozen=True)
class PriorityResult:
    scenario: str
    score: Fraction
    band: str
    rank: int
    impact: Fraction
    risk: Fraction
    relevance: Fraction
    manual: bool = False
    computed_band: str = ""


def band_for(score: Fraction, high: Fraction = HIGH_CUTOFF, medium: Fraction = MEDIUM_CUTOFF) -> str:
    if score >= high:
        return "high"
    if score >= medium:
        return "medium"
    return "low"


def _weights(weights: Sequence[float]) -> tuple[Fraction, Fraction, Fraction]:
    if len(weights) != 3:
        raise ValidationError("weights need three values: impact, risk, relevance")
    ws = tuple(Fraction(str(w)) if isinstance(w, float) else Fraction(w) for w in weights)
    if any(w < 0 for w in ws):
        raise ValidationError("weights must be non-negative")
    if sum(ws) == 0:
        raise ValidationError("weights must not all be zero")
    return ws  # type: ignore[return-value]


def _score(impact: Fraction, risk: Fraction, relevance: Fraction, ws) -> Fraction:
    return (ws[0] * impact + ws[1] * risk + ws[2] * relevance) / sum(ws)


def _rank(results: Iterable[PriorityResult]) -> list[PriorityResult]:
    ordered = sorted(results, key=lambda r: (-r.score, r.scenario))
    return [replace(r, rank=i) for i, r in enumerate(ordered, start=1)]


def _apply_band(result: PriorityResult, overrides: Mapping[str, str]) -> PriorityResult:
    computed = band_for(result.score)
    band = overrides.get(result.scenario)
    if band in (None, "unset"):
        return replace(result, band=computed, computed_band=computed, manual=False)
    if band not in BANDS:
        raise ValidationError(f"band override for {result.scenario} must be one of {', '.join(BANDS)}")
    return replace(result, band=band, computed_band=computed, manual=True)


def prioritise(
    inputs: Iterable[PriorityInput],
    weights: Sequence[float] = DEFAULT_WEIGHTS,
    overrides: Mapping[str, str] | None = None,
    scenarios: Iterable[str] | None = None,
) -> list[PriorityResult]:
    """Rank scenarios by weighted stakeholder score.

    ``overrides`` maps scenario id to a directly assigned band; it shadows the
    computed band (``manual`` is set) but never the score or rank. When
    ``scenarios`` is given, each must have at least one input.
    """
    ws = _weights(weights)
    by_scenario: dict[str, list[PriorityInput]] = defaultdict(list)
    seen: set[tuple[str, str]] = set()
    for p in inputs:
        key = (p.scenario, p.stakeholder)
        if key in seen:
            raise ValidationError(f"duplicate input from {p.stakeholder} for {p.scenario}")
        seen.add(key)
        by_scenario[p.scenario].append(p)
    if scenarios is not None:
        for sid in scenarios:
            if sid not in by_scenario:
                raise ValidationError(f"scenario {sid} has no priority inputs")
    results = []
    for sid, items in by_scenario.items():
        n = len(items)
        impact = Fraction(sum(p.impact for p in items), n)
        risk = Fraction(sum(p.risk for p in items), n)
        relevance = Fraction(sum(p.relevance for p in items), n)
        score = _score(impact, risk, relevance, ws)
        results.append(PriorityResult(sid, score, "", 0, impact, risk, relevance))
    overrides = overrides or {}
    return _rank(_apply_band(r, overrides) for r in results)


def persistent_scenarios(violations: Iterable) -> set[str]:
    """Scenario ids with at least one persistent violation summary."""
    out = set()
    for v in violations:
        if isinstance(v, str):
            out.add(v)
        elif getattr(v, "persistent", False):
            out.add(v.scenario)
    return out


def reprioritise(
    results: Sequence[PriorityResult],
    violations: Iterable,
    weights: Sequence[float] = DEFAULT_WEIGHTS,
) -> list[PriorityResult]:
    """Raise the risk component to 5 for persistently violated scenarios and re-rank.

    ``violations`` holds violation summaries (only persistent ones count) or
    bare scenario ids. Unviolated scenarios keep their prior scores; manual
    band overrides stay in force.
    """
    ws = _weights(weights)
    known = {r.scenario for r in results}
    hit = persistent_scenarios(violations)
    for sid in sorted(hit):
        if sid not in known:
            raise ValidationError(f"violation references unknown scenario {sid!r}")
    if not hit:
        return list(results)
    updated = []
    for r in results:
        if r.scenario in hit:
            risk = Fraction(5)
            score = _score(r.impact, risk, r.relevance, ws)
            computed = band_for(score)
            r = replace(r, risk=risk, score=score, computed_band=computed,
                        band=r.band if r.manual else computed)
        updated.append(r)
    return _rank(updated)


def format_score(score: Fraction) -> str:
    return f"{float(score):.3f}"
