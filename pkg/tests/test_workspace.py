import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from arceval.corpus import POST, PRE, luna_workspace
from arceval.errors import ProcessError, ValidationError
from arceval.model import ArchitectureModel, Component, ContextScenario, GovernanceTag, Risk
from arceval.vocab import QUALITIES
from arceval.workspace import (
    DESIGN_STEPS,
    MANIFEST,
    PREREQUISITES,
    STEPS,
    QualityRequirement,
    Workspace,
    advance,
    coverage_check,
    diff_architectures,
    load_workspace,
    save_workspace,
)

from process_steps import luna_sequence, replay


def scen(sid, quality="accuracy"):
    return ContextScenario(sid, quality, "s", "t", "e", ("agent",), "r")


def test_define_scenarios_first_is_rejected():
    with pytest.raises(ProcessError) as exc:
        advance(Workspace(), "define-scenarios", {})
    assert exc.value.missing == "identify-requirements"
    assert "missing identify-requirements" in str(exc.value)


def test_luna_sequence_completes_design_steps():
    ws = replay()
    assert ws.completed == DESIGN_STEPS
    assert ws.current_architecture == POST
    assert [m.name for m in ws.architectures] == [PRE, POST]


def test_replayed_workspace_matches_packaged():
    assert replay() == luna_workspace()


def test_reprioritise_reopens_analysis():
    ws = advance(advance(replay(), "monitor-risks"), "reprioritise")
    assert "analyse-architecture" not in ws.completed
    assert "improve-architecture" not in ws.completed
    assert set(ws.completed) == set(STEPS) - {"analyse-architecture", "improve-architecture"}
    ws = advance(advance(ws, "analyse-architecture"), "improve-architecture")
    assert set(ws.completed) == set(STEPS)


def test_monitor_requires_improvement_after_reopen():
    ws = advance(advance(replay(), "monitor-risks"), "reprioritise")
    with pytest.raises(ProcessError):
        advance(ws, "monitor-risks")


def test_goals_and_governance_unordered():
    a = advance(advance(Workspace(), "review-governance"), "understand-goals")
    b = advance(advance(Workspace(), "understand-goals"), "review-governance")
    assert set(a.completed) == set(b.completed)
    with pytest.raises(ProcessError) as exc:
        advance(advance(Workspace(), "understand-goals"), "identify-requirements")
    assert exc.value.missing == "review-governance"


def test_scenarios_may_precede_architecture_review():
    ws = replay(luna_sequence()[:3])
    ws = advance(ws, "define-scenarios")
    ws = advance(ws, "review-architecture")
    assert "define-scenarios" in ws.completed


@settings(max_examples=200, deadline=None)
@given(st.sets(st.sampled_from(STEPS)), st.sampled_from(STEPS))
def test_advance_follows_prerequisite_table(done, step):
    ws = Workspace(completed=tuple(s for s in STEPS if s in done))
    allowed = all(p in done for p in PREREQUISITES[step])
    if not allowed:
        with pytest.raises(ProcessError):
            advance(ws, step)
        return
    after = advance(ws, step)
    removed = set(ws.completed) - set(after.completed)
    if step == "reprioritise":
        assert removed == {"analyse-architecture", "improve-architecture"} & done
    else:
        assert removed == set()
    assert step in after.completed


def test_unknown_step_and_payload_key():
    with pytest.raises(ValidationError):
        advance(Workspace(), "celebrate")
    with pytest.raises(ValidationError):
        advance(Workspace(), "understand-goals", {"mood": "good"})


def test_revisions_are_append_only():
    ws = replay()
    with pytest.raises(ValidationError):
        advance(ws, "improve-architecture", {"architectures": [ws.architecture(PRE)]})
    with pytest.raises(ValidationError):
        advance(ws, "improve-architecture", {"current": "nope"})
    back = advance(ws, "improve-architecture", {"current": PRE})
    assert back.current.name == PRE and len(back.architectures) == 2


def test_payload_records_replace_by_id():
    ws = replay()
    new = Risk("risk-efficiency-gap", "rewritten", ("luna-3",))
    ws2 = advance(ws, "analyse-architecture", {"risks": [new]})
    assert len(ws2.analysis.risks) == len(ws.analysis.risks)
    assert [r for r in ws2.analysis.risks if r.id == new.id] == [new]


def test_luna_coverage_check_has_no_requirement_gaps():
    findings = coverage_check(luna_workspace())
    assert not [f for f in findings if f.code == "requirement-without-scenario"]
    assert findings == []


def test_coverage_check_examples():
    base = Workspace(completed=("understand-goals", "review-governance", "identify-requirements"))
    ws = Workspace(requirements=(QualityRequirement("fairness"),), completed=base.completed)
    assert [f.code for f in coverage_check(ws)] == ["requirement-without-scenario"]
    ws = Workspace(requirements=(QualityRequirement("accuracy"),), scenarios=(scen("a"),), completed=base.completed)
    assert coverage_check(ws) == []
    ws = Workspace(governance=(GovernanceTag("G1", "x"),), requirements=(QualityRequirement("accuracy", governance_refs=("G9",)),),
                   scenarios=(scen("a"), scen("b", "safety")), completed=base.completed)
    assert [f.code for f in coverage_check(ws)] == [
        "unknown-governance-ref", "governance-unmapped", "scenario-outside-requirements"]
    with pytest.raises(ProcessError):
        coverage_check(Workspace())


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(QUALITIES), max_size=6, unique=True),
       st.lists(st.sampled_from(QUALITIES), max_size=6),
       st.sampled_from(QUALITIES))
def test_coverage_check_monotone(required, scenario_qualities, extra):
    done = ("understand-goals", "review-governance", "identify-requirements")
    scenarios = tuple(scen(f"s{i}", q) for i, q in enumerate(scenario_qualities))
    ws = Workspace(requirements=tuple(QualityRequirement(q) for q in required), scenarios=scenarios, completed=done)
    grown = Workspace(requirements=ws.requirements, scenarios=scenarios + (scen("new", extra),), completed=done)

    def gaps(w):
        return {f.subject for f in coverage_check(w) if f.code == "requirement-without-scenario"}

    assert gaps(grown) <= gaps(ws)


def test_diff_luna_pre_post():
    ws = luna_workspace()
    changes = diff_architectures(ws.architecture(PRE), ws.architecture(POST))
    added = {(c.category, c.id) for c in changes if c.action == "added"}
    for cid in ("memory", "agentops", "reranker", "data-chunker"):
        assert ("component", cid) in added
    assert ("approach", "cross-component-guardrails") in added
    assert ("approach", "prompt-desensitiser") in {(c.category, c.id) for c in changes if c.action == "removed"}
    artefacts = {c.detail for c in changes if c.category == "component" and c.action == "added"}
    assert {"agent-memory", "agentops"} <= artefacts


def test_diff_identity_and_rename():
    m = ArchitectureModel("m", "1", (Component("a", "generator"), Component("b", "retriever")))
    assert diff_architectures(m, m) == []
    renamed = ArchitectureModel("m", "2", (Component("a2", "generator"), Component("b", "retriever")))
    assert [(c.action, c.id) for c in diff_architectures(m, renamed)] == [("removed", "a"), ("added", "a2")]
    edited = ArchitectureModel("m", "2", (Component("a", "generator", "new"), Component("b", "retriever")))
    (change,) = diff_architectures(m, edited)
    assert str(change) == "modified component a (description)"


def test_save_load_roundtrip(tmp_path):
    ws = advance(advance(replay(), "monitor-risks"), "reprioritise")
    save_workspace(ws, tmp_path)
    assert load_workspace(tmp_path) == ws
    manifest = json.loads((tmp_path / MANIFEST).read_text())
    assert manifest["current_architecture"] == POST


def test_load_rejects_bad_manifest(tmp_path):
    save_workspace(replay(), tmp_path)
    path = tmp_path / MANIFEST
    good = json.loads(path.read_text())
    for mutate in (
        lambda m: m.update(current_architecture="ghost"),
        lambda m: m.update(completed=["sleep"]),
        lambda m: m["ledger"]["risks"].append({"id": "r", "text": "t", "scenarios": ["ghost"]}),
        lambda m: m.update(documents=m["documents"] + ["scenarios.arc"]),
    ):
        bad = json.loads(json.dumps(good))
        mutate(bad)
        path.write_text(json.dumps(bad))
        with pytest.raises(ValidationError):
            load_workspace(tmp_path)


def test_independent_steps_accept_any_order():
    independent = ["understand-goals", "review-governance", "review-architecture"]
    for order in itertools.permutations(independent):
        ws = Workspace()
        for step in order:
            ws = advance(ws, step)
        assert ws.completed == order
