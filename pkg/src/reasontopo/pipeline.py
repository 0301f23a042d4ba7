"""End-to-end helpers shared by the CLI: profile corpora, fit a health base, diagnose a trace."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .agent import RepairReport, repair
from .config import GlobalConfig
from .health import HealthBase, DeviationReport, InsufficientDataError, MIN_PROFILES, deviation, fit_bands
from .indicators import TopologicalProfile, profile
from .trace import ReasoningTrace


def profile_trace(trace: ReasoningTrace, cfg: Optional[GlobalConfig] = None) -> TopologicalProfile:
    cfg = cfg or GlobalConfig()
    return profile(trace, cfg.distance, w_threshold=cfg.w_threshold, entropy_base=cfg.entropy_base)


def profile_corpus(traces: Sequence[ReasoningTrace], cfg: Optional[GlobalConfig] = None) -> list:
    return [profile_trace(t, cfg) for t in traces]


def build_base(traces: Sequence[ReasoningTrace], task: str, cfg: Optional[GlobalConfig] = None,
               base: Optional[HealthBase] = None, corpus_id: str = "") -> HealthBase:
    """Fit bands for ``task`` from its correctly solved traces and store them in ``base``."""
    cfg = cfg or GlobalConfig()
    selected = [t for t in traces if t.task_type == task and t.label == "correct"]
    if len(selected) < MIN_PROFILES:
        raise InsufficientDataError(
            f"task {task!r} has {len(selected)} correct traces; at least {MIN_PROFILES} are required")
    bands = fit_bands(profile_corpus(selected, cfg), quantile_cfg=cfg.quantile_cfg, mode=cfg.band_mode)
    base = base if base is not None else HealthBase()
    priority = base.priority.get(task)
    base.set_task(task, bands, priority)
    base.provenance[task] = {"corpus": corpus_id, "n_traces": len(selected)}
    return base


@dataclass(frozen=True)
class Diagnosis:
    task: str
    profile: TopologicalProfile
    deviation: DeviationReport
    report: RepairReport

    def to_dict(self) -> dict:
        return {"task": self.task, "profile": self.profile.to_dict(),
                "deviation": self.deviation.to_dict(), "report": self.report.to_dict()}


def diagnose(trace: ReasoningTrace, base: HealthBase, task: Optional[str] = None,
             cfg: Optional[GlobalConfig] = None, question: Optional[str] = None,
             prompt: Optional[str] = None, bands_task: Optional[str] = None) -> Diagnosis:
    """Profile ``trace``, score it against the task bands and render the repair report.

    ``bands_task`` selects another task's bands (cross-task transfer).
    """
    task = task or trace.task_type
    bands = base.bands(bands_task or task)
    prof = profile_trace(trace, cfg)
    dev = deviation(prof, bands, base.priority.get(bands_task or task))
    question = question if question is not None else (trace.question or "")
    prompt = prompt if prompt is not None else (trace.prompt or "")
    report = repair(question, prompt, dev, bands, prior_answer=trace.answer)
    return Diagnosis(task=task, profile=prof, deviation=dev, report=report)
