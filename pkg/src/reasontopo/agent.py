"""Deviation report -> structured repair report (diagnosis, rationale, repaired prompt).

The deterministic path maps each violated (metric, direction) pair to one
prompt-repair template. ``refine_via_llm`` optionally hands the draft to an
external model over HTTP and falls back to the draft on any failure.
"""
from __future__ import annotations

import json
import logging
import os
import urllib.error
import urllib.request
from dataclasses import asdict, dataclass, replace
from typing import Mapping, Optional, Sequence

from .health import DeviationReport, HealthBand
from .indicators import METRIC_LABELS, METRICS

log = logging.getLogger(__name__)

BELOW, ABOVE = "below", "above"


@dataclass(frozen=True)
class RepairStrategy:
    metric: str
    direction: str
    template_id: str
    instruction_text: str
    diagnosis_text: str
    rationale_text: str

    def instruction(self, question: str) -> str:
        return self.instruction_text.format(question=question)


def _s(metric, direction, template_id, instruction, diagnosis, rationale):
    return RepairStrategy(metric, direction, template_id, instruction, diagnosis, rationale)


STRATEGIES = {
    (s.metric, s.direction): s for s in [
        _s("f_coh", BELOW, "closed_loop",
           "Form a closed loop: for each candidate result, substitute it back into the original "
           "equation or conditions of the question ({question}) and check that both sides agree; "
           "discard any candidate that fails this loop test.",
           "the reasoning path was linear and lacked topological loops",
           "no verification loop returns to the problem statement, so unchecked intermediate "
           "results (for example extraneous roots) reach the final answer"),
        _s("f_coh", ABOVE, "trim_loops",
           "Keep one verification pass per intermediate result and drop repeated re-checks that only "
           "restate earlier steps.",
           "the reasoning circled back on itself more than healthy traces do",
           "redundant loops add cost and can re-open settled results without adding evidence"),
        _s("f_val", BELOW, "request_evidence",
           "Request explicit evidence: for every non-trivial claim, cite the given condition or earlier "
           "step that justifies it, and mark the steps that verify a result.",
           "few steps carried explicit verification or evidence",
           "claims without cited support cannot be checked and errors propagate silently"),
        _s("f_val", ABOVE, "focus_validation",
           "Reserve explicit verification for the results that matter (case splits, the final answer); "
           "do not re-verify routine manipulations.",
           "verification steps dominated the reasoning",
           "excess re-verification crowds out the derivation itself"),
        _s("density", BELOW, "link_dependencies",
           "Connect the reasoning: each step must name every earlier step or given condition it actually "
           "uses, including non-adjacent ones.",
           "the dependency graph was sparse and close to a bare chain",
           "missing cross-references hide which facts each conclusion rests on"),
        _s("density", ABOVE, "prune_branches",
           "Prune redundant branches: remove steps and dependency links that repeat an earlier derivation "
           "and keep a single justification per result.",
           "the dependency graph was denser than healthy traces",
           "redundant reasoning paths suggest repeated or circular justification"),
        _s("f_pen", BELOW, "deepen",
           "Deepen the topology: construct a causal chain from the underlying mechanism to the observed "
           "result, one level of explanation per step.",
           "the reasoning stayed shallow in the hierarchy",
           "the answer is stated at the surface level without the intermediate levels that explain it"),
        _s("f_pen", ABOVE, "flatten",
           "Flatten the hierarchy: merge nested sub-derivations that do not change the result and state "
           "intermediate conclusions directly.",
           "the reasoning nested deeper than healthy traces",
           "deep nesting makes the chain long and fragile for this task type"),
        _s("f_div", BELOW, "inject_evidence_nodes",
           "Inject evidence nodes: open independent lines of support (separate facts, cases or methods) "
           "and cite each as its own dependency before combining them.",
           "the reasoning followed a single branch",
           "one line of support leaves the conclusion exposed to a single faulty premise"),
        _s("f_div", ABOVE, "focus_branches",
           "Focus the exploration: keep the two or three most promising lines of reasoning and explicitly "
           "drop the others before continuing.",
           "the reasoning spread across too many branches",
           "unfocused branching dilutes the derivation and rarely converges"),
        _s("f_complexity", BELOW, "add_intermediate_steps",
           "Add intermediate steps: expand compressed jumps into explicit sub-steps and link each one to "
           "the steps it depends on.",
           "the reasoning graph was structurally thin",
           "compressed jumps skip the intermediate structure that healthy traces show"),
        _s("f_complexity", ABOVE, "simplify",
           "Simplify the structure: combine steps that only restate results and remove detours that do "
           "not feed the final answer.",
           "the reasoning graph was more complex than needed",
           "detours and restatements inflate the structure without improving support"),
    ]
}

KEEP_INSTRUCTION = "Keep the derivation steps that are already sound."


@dataclass(frozen=True)
class RepairReport:
    r_diag: str
    r_analysis: str
    r_prompt: str
    deviations: tuple = ()  # rows: {metric, value, lower, upper, e, direction}
    triggered: bool = False
    fallback: bool = False
    note: Optional[str] = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["deviations"] = [dict(r) for r in self.deviations]
        return d


@dataclass(frozen=True)
class LlmClientSpec:
    endpoint: str
    model: str = "default"
    timeout: float = 30.0
    token_env: Optional[str] = None
    system: Optional[str] = None

    def __post_init__(self):
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")


def _direction(dev: DeviationReport, metric: str, bands: Mapping[str, HealthBand]) -> str:
    return BELOW if dev.values[metric] < bands[metric].lower else ABOVE


def select_strategies(dev: DeviationReport, bands: Mapping[str, HealthBand]) -> list:
    """One strategy per violated metric, largest deviation first; empty unless repair is triggered."""
    if not dev.triggered:
        return []
    violated = sorted(dev.violated, key=lambda m: (-dev.e[m], METRICS.index(m)))
    return [STRATEGIES[(m, _direction(dev, m, bands))] for m in violated]


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _deviation_rows(dev: DeviationReport, bands: Mapping[str, HealthBand]) -> tuple:
    rows = []
    for m in dev.violated:
        b = bands[m]
        rows.append({"metric": m, "value": dev.values[m], "lower": b.lower, "upper": b.upper,
                     "e": dev.e[m], "direction": _direction(dev, m, bands)})
    return tuple(rows)


def render_report(question: str, original_prompt: str, dev: DeviationReport,
                  strategies: Sequence[RepairStrategy], bands: Mapping[str, HealthBand],
                  prior_answer: Optional[str] = None) -> RepairReport:
    rows = _deviation_rows(dev, bands)
    table = "\n".join(
        f"  {METRIC_LABELS[r['metric']]:<13} {_fmt(r['value']):>8}  {r['direction']} "
        f"[{_fmt(r['lower'])}, {_fmt(r['upper'])}]  e={r['e']:.3f}" for r in rows)

    if not dev.triggered:
        diag = "Structure within health bands for all priority metrics; no repair triggered."
        if rows:
            diag += "\nNon-priority deviations:\n" + table
        return RepairReport(r_diag=diag, r_analysis="No structural repair needed.",
                            r_prompt=original_prompt, deviations=rows, triggered=False)

    findings = []
    for st in strategies:
        b = bands[st.metric]
        findings.append(f"{st.diagnosis_text} ({METRIC_LABELS[st.metric]}={_fmt(dev.values[st.metric])}, "
                        f"healthy band [{_fmt(b.lower)}, {_fmt(b.upper)}])")
    r_diag = f"Structural diagnosis: {'; '.join(findings)}.\nViolated metrics ({dev.violations}):\n{table}"

    analysis = "\n".join(
        f"- {METRIC_LABELS[st.metric]} is {dev.e[st.metric]:.2f} sigma {st.direction} its band: "
        f"{st.rationale_text}. Repair: {st.template_id}." for st in strategies)

    steps = [KEEP_INSTRUCTION] + [st.instruction(question) for st in strategies]
    numbered = " ".join(f"{i}. {text}" for i, text in enumerate(steps, start=1))
    parts = []
    if prior_answer:
        parts.append(f'Your previous reasoning result was "{prior_answer}".')
    parts.append(f"Question: {question}")
    parts.append(f"Structural Diagnosis: {'; '.join(findings)}.")
    parts.append(f"Optimization Strategy: {numbered}")
    if original_prompt:
        parts.append(original_prompt)
    return RepairReport(r_diag=r_diag, r_analysis=analysis, r_prompt="\n".join(parts),
                        deviations=rows, triggered=True)


def repair(question: str, original_prompt: str, dev: DeviationReport, bands: Mapping[str, HealthBand],
           prior_answer: Optional[str] = None) -> RepairReport:
    return render_report(question, original_prompt, dev, select_strategies(dev, bands), bands, prior_answer)


# -- optional LLM refinement ---------------------------------------------------

DEFAULT_SYSTEM = (
    "Role: prompt repair agent for step-by-step reasoning. Read the task type, question, original prompt, "
    "the six structural indicators of the model's last reasoning trace and the task's healthy ranges. "
    "Return JSON with keys r_diag (what is structurally wrong), r_analysis (why the repair helps) and "
    "r_prompt (the repaired prompt; it must contain the question verbatim)."
)


def request_body(report: RepairReport, client: LlmClientSpec, task_type: str, question: str,
                 original_prompt: str, features: Mapping[str, float],
                 bands: Mapping[str, HealthBand]) -> dict:
    return {
        "model": client.model,
        "system": client.system or DEFAULT_SYSTEM,
        "input": {
            "task_type": task_type,
            "question": question,
            "original_prompt": original_prompt,
            "features": {m: float(features[m]) for m in METRICS},
            "health_bands": {m: [bands[m].lower, bands[m].upper] for m in METRICS},
            "draft": {"r_diag": report.r_diag, "r_analysis": report.r_analysis, "r_prompt": report.r_prompt},
        },
    }


def refine_via_llm(report: RepairReport, client: LlmClientSpec, *, task_type: str, question: str,
                   original_prompt: str, features: Mapping[str, float],
                   bands: Mapping[str, HealthBand]) -> RepairReport:
    """Ask an external model to rewrite the report; never raises, falls back to ``report``."""
    body = json.dumps(request_body(report, client, task_type, question, original_prompt,
                                   features, bands)).encode("utf-8")
    headers = {"Content-Type": "application/json"}
    if client.token_env:
        token = os.environ.get(client.token_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
    req = urllib.request.Request(client.endpoint, data=body, headers=headers, method="POST")
    try:
        with urllib.request.urlopen(req, timeout=client.timeout) as resp:
            raw = resp.read()
    except (urllib.error.URLError, OSError, ValueError) as exc:
        log.warning("LLM refinement failed (%s); using deterministic report", exc)
        return replace(report, fallback=True, note=f"request failed: {exc}")
    try:
        reply = json.loads(raw.decode("utf-8"))
        fields = {k: reply[k] for k in ("r_diag", "r_analysis", "r_prompt")}
        if not all(isinstance(v, str) for v in fields.values()):
            raise TypeError("reply fields must be strings")
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError) as exc:
        log.warning("LLM reply could not be parsed (%s); using deterministic report", exc)
        return replace(report, fallback=True, note=f"parse error: {exc}")
    if report.triggered and not fields["r_prompt"].strip():
        return replace(report, fallback=True, note="parse error: empty r_prompt")
    return replace(report, **fields, fallback=False, note=None)
