"""Brute-force reference implementations used to freeze expected values.

Nothing here imports the evaluation code under test; each function recomputes
its answer from first principles with exact arithmetic.
"""

from fractions import Fraction

UNIT_MS = {"ms": 1, "s": 1000, "h": 3_600_000}


def ratio(events, tag, population=None):
    """Fraction of population events carrying tag, or None when empty."""
    pop = [e for e in events if population is None or population in e.outcome_tags]
    if not pop:
        return None
    hits = 0
    for e in pop:
        for t in e.outcome_tags:
            if t == tag:
                hits += 1
                break
    return Fraction(hits, len(pop))


def percentile(values, p):
    """Smallest value v with at least p% of the sample <= v."""
    if not values:
        return None
    ordered = sorted(values)
    need = Fraction(str(p)) * len(ordered) / 100
    for i, v in enumerate(ordered):
        # ordered[: i + 1] are all <= v
        if i + 1 >= need:
            return v
    raise AssertionError("unreachable")


def completeness(events, kinds):
    seen = {}
    for e in events:
        seen.setdefault(e.trace_id, set()).add(e.span_kind)
    if not seen:
        return None
    wanted = set(kinds)
    total = sum(Fraction(len(wanted & got), len(wanted)) for got in seen.values())
    return total / len(seen)


def resolved_fraction(events, open_tag, close_tag, comparator, deadline, unit):
    limit = Fraction(str(deadline)) * UNIT_MS[unit]

    def tagged(e, tag):
        return e.span_kind == tag or tag in e.outcome_tags

    opens = [e for e in events if tagged(e, open_tag)]
    if not opens:
        return None
    by_trace = {}
    for e in events:
        by_trace.setdefault(e.trace_id, []).append(e)
    ok = 0
    for o in opens:
        for c in by_trace[o.trace_id]:
            if not tagged(c, close_tag) or c.ts < o.ts:
                continue
            gap = c.ts - o.ts
            if (gap <= limit) if comparator == "<=" else (gap < limit):
                ok += 1
                break
    return Fraction(ok, len(opens))


def holds(observed, comparator, threshold):
    observed, threshold = Fraction(observed), Fraction(str(threshold))
    return {
        "<": observed < threshold,
        "<=": observed <= threshold,
        ">": observed > threshold,
        ">=": observed >= threshold,
        "==": observed == threshold,
    }[comparator]


def count_windows(n, size, stride):
    """Index ranges of count windows over n events."""
    out = []
    start = 0
    while True:
        out.append(list(range(start, min(start + size, n))))
        if start + size >= n:
            return out
        start += stride


def duration_windows(timestamps, size_ms, stride_ms):
    """Index lists of duration windows over sorted timestamps."""
    if not timestamps:
        return []
    t0, last = timestamps[0], timestamps[-1]
    out = []
    k = 0
    while True:
        lo = t0 + k * stride_ms
        out.append([i for i, t in enumerate(timestamps) if lo <= t < lo + size_ms])
        if lo + size_ms > last:
            return out
        k += 1


def longest_streak(outcomes):
    """Longest run of fails where insufficient-data is skipped, not a reset."""
    best = run = 0
    for o in outcomes:
        if o == "fail":
            run += 1
        elif o == "pass":
            run = 0
        best = max(best, run)
    return best


def weighted_score(triples, weights):
    """triples: per-stakeholder (impact, risk, relevance)."""
    n = len(triples)
    means = [Fraction(sum(t[i] for t in triples), n) for i in range(3)]
    w = [Fraction(str(x)) for x in weights]
    return sum(m * x for m, x in zip(means, w)) / sum(w)


def band(score):
    if score >= 4:
        return "high"
    if score >= Fraction(5, 2):
        return "medium"
    return "low"
