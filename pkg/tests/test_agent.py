import dataclasses
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casestudy import MATH_ALGEBRA, MATH_QUESTION, MMLU_PHYSICS, MMLU_QUESTION, bands_of, profile_of
from reasontopo.agent import (KEEP_INSTRUCTION, STRATEGIES, LlmClientSpec, refine_via_llm, repair,
                              request_body, select_strategies)
from reasontopo.health import HealthBand, deviation
from reasontopo.indicators import METRICS, TopologicalProfile
from reasontopo.llm_mock import serve

PROMPT = "Please reason step-by-step and cite the step each step depends on."


def math_case():
    bands = bands_of(MATH_ALGEBRA)
    return deviation(profile_of(MATH_ALGEBRA), bands), bands


def test_table_covers_every_metric_and_direction():
    assert set(STRATEGIES) == {(m, d) for m in METRICS for d in ("below", "above")}
    assert len({s.template_id for s in STRATEGIES.values()}) == 12


def test_strategies_ordered_by_deviation():
    dev, bands = math_case()
    chosen = select_strategies(dev, bands)
    assert [s.metric for s in chosen] == sorted(dev.violated, key=lambda m: -dev.e[m])
    assert (chosen[0].metric, chosen[0].direction) == ("f_pen", "above")  # 0.9 over the band


def test_math_case_adds_closed_loop_with_question():
    dev, bands = math_case()
    rep = repair(MATH_QUESTION, PROMPT, dev, bands, prior_answer="x = 0 or x = 5")
    assert rep.triggered and not rep.fallback
    assert "substitute it back into the original equation" in rep.r_prompt
    assert MATH_QUESTION in rep.r_prompt and PROMPT in rep.r_prompt
    assert rep.r_prompt.startswith('Your previous reasoning result was "x = 0 or x = 5".')
    assert KEEP_INSTRUCTION in rep.r_prompt
    assert "lacked topological loops" in rep.r_diag
    assert {r["metric"] for r in rep.deviations} == set(dev.violated)


def test_mmlu_case_asks_for_evidence_nodes():
    bands = bands_of(MMLU_PHYSICS)
    dev = deviation(profile_of(MMLU_PHYSICS), bands)
    rep = repair(MMLU_QUESTION, PROMPT, dev, bands)
    assert "Inject evidence nodes" in rep.r_prompt
    assert "Add intermediate steps" in rep.r_prompt
    # initial penetrability already sits inside its band here
    assert "f_pen" not in dev.violated and "Deepen the topology" not in rep.r_prompt
    shallow = dataclasses.replace(profile_of(MMLU_PHYSICS), f_pen=0.1)
    rep2 = repair(MMLU_QUESTION, PROMPT, deviation(shallow, bands), bands)
    assert "Deepen the topology" in rep2.r_prompt


def test_not_triggered_returns_prompt_unchanged():
    bands = bands_of(MATH_ALGEBRA)
    dev = deviation(profile_of(MATH_ALGEBRA, 3), bands)
    rep = repair(MATH_QUESTION, PROMPT, dev, bands)
    assert not rep.triggered and rep.r_prompt == PROMPT
    assert rep.r_diag.startswith("Structure within health bands")


def test_non_priority_violation_is_reported_but_not_repaired():
    bands = bands_of(MATH_ALGEBRA)
    p = dataclasses.replace(profile_of(MATH_ALGEBRA, 3), f_pen=9.0)
    dev = deviation(p, bands, priority=("f_coh", "f_val"))
    rep = repair(MATH_QUESTION, PROMPT, dev, bands)
    assert rep.r_prompt == PROMPT and "F_pen" in rep.r_diag


@given(st.sampled_from(METRICS), st.floats(0.01, 5), st.floats(0.01, 5))
@settings(max_examples=60, deadline=None)
def test_further_out_same_repair(metric, gap, extra):
    bands = {m: HealthBand(m, 1.0, 2.0, 0.5) for m in METRICS}
    base = {m: 1.5 for m in METRICS}
    near = TopologicalProfile(**{**base, metric: 2.0 + gap})
    far = TopologicalProfile(**{**base, metric: 2.0 + gap + extra})
    d_near, d_far = deviation(near, bands), deviation(far, bands)
    assert d_far.severity > d_near.severity
    assert select_strategies(d_far, bands) == select_strategies(d_near, bands)


def test_request_body_shape():
    dev, bands = math_case()
    rep = repair(MATH_QUESTION, PROMPT, dev, bands)
    body = request_body(rep, LlmClientSpec("http://x"), "MATH", MATH_QUESTION, PROMPT,
                        profile_of(MATH_ALGEBRA).to_dict(), bands)
    assert set(body) == {"model", "system", "input"}
    assert body["input"]["health_bands"]["f_coh"] == [0.34, 0.71]
    assert body["input"]["draft"]["r_prompt"] == rep.r_prompt
    json.dumps(body)


def _refine(url, rep, bands, **kw):
    return refine_via_llm(rep, LlmClientSpec(url, timeout=5, **kw), task_type="MATH", question=MATH_QUESTION,
                          original_prompt=PROMPT, features=profile_of(MATH_ALGEBRA).to_dict(), bands=bands)


def test_echo_server_keeps_report(monkeypatch):
    dev, bands = math_case()
    rep = repair(MATH_QUESTION, PROMPT, dev, bands)
    monkeypatch.setenv("REPAIR_TOKEN", "s3cret")
    with serve("echo") as (url, seen):
        out = _refine(url, rep, bands, token_env="REPAIR_TOKEN")
    assert out == rep and not out.fallback
    assert seen[0]["authorization"] == "Bearer s3cret"
    assert seen[0]["body"]["input"]["question"] == MATH_QUESTION


def test_rewrite_server_replaces_text():
    dev, bands = math_case()
    rep = repair(MATH_QUESTION, PROMPT, dev, bands)
    with serve("rewrite") as (url, seen):
        out = _refine(url, rep, bands)
    assert out.r_prompt == "[refined] " + rep.r_prompt and not out.fallback
    assert seen[0]["authorization"] is None


@pytest.mark.parametrize("mode, note", [("malformed", "parse error"), ("error", "request failed")])
def test_bad_server_falls_back(mode, note):
    dev, bands = math_case()
    rep = repair(MATH_QUESTION, PROMPT, dev, bands)
    with serve(mode) as (url, _):
        out = _refine(url, rep, bands)
    assert out.fallback and out.note.startswith(note)
    assert (out.r_diag, out.r_analysis, out.r_prompt) == (rep.r_diag, rep.r_analysis, rep.r_prompt)


def test_unreachable_endpoint_falls_back():
    dev, bands = math_case()
    rep = repair(MATH_QUESTION, PROMPT, dev, bands)
    out = _refine("http://127.0.0.1:9/none", rep, bands)
    assert out.fallback and out.r_prompt == rep.r_prompt
    assert _refine("http://127.0.0.1:9/none", rep, bands) == out


def test_client_spec_validation():
    with pytest.raises(ValueError):
        LlmClientSpec("http://x", timeout=0)
