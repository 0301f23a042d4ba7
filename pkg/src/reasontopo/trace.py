"""Reasoning-trace data model and the JSON trace / corpus formats.

A trace document looks like::

    {"task_type": "MATH", "paradigm": "CoT", "label": "correct",
     "steps": [{"id": 0, "text": "...", "depth": 0, "branch": 0,
                "deps": [], "is_validation": false, "embedding": [...]}]}

Optional top-level ``question``, ``prompt`` and ``answer`` strings are carried
through unchanged so the repair report can quote them.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Optional, Union

PARADIGMS = ("CoT", "ToT", "GoT", "AoT", "other")
LABELS = ("correct", "incorrect", "unknown")

Branch = Union[str, int]


class TraceError(ValueError):
    """Raised for any trace document that violates the data model."""

    def __init__(self, message: str, step_id: Optional[int] = None):
        self.step_id = step_id
        super().__init__(message)


@dataclass(frozen=True)
class ReasoningStep:
    id: int
    text: str
    depth: int = 0
    branch: Branch = 0
    deps: frozenset = field(default_factory=frozenset)
    is_validation: bool = False
    embedding: Optional[tuple] = None


@dataclass(frozen=True)
class ReasoningTrace:
    task_type: str
    paradigm: str
    steps: tuple
    label: str = "unknown"
    question: Optional[str] = None
    prompt: Optional[str] = None
    answer: Optional[str] = None

    def __post_init__(self):
        validate(self)

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def has_embeddings(self) -> bool:
        return self.steps[0].embedding is not None


def validate(trace: ReasoningTrace) -> None:
    if not isinstance(trace.task_type, str) or not trace.task_type:
        raise TraceError("task_type must be a non-empty string")
    if not isinstance(trace.paradigm, str) or not trace.paradigm:
        raise TraceError("paradigm must be a non-empty string")
    if trace.paradigm not in PARADIGMS:
        raise TraceError(f"unknown paradigm {trace.paradigm!r}; expected one of {PARADIGMS}")
    if trace.label not in LABELS:
        raise TraceError(f"unknown label {trace.label!r}; expected one of {LABELS}")
    if not trace.steps:
        raise TraceError("trace has no steps")

    dim = None
    n_embedded = 0
    for pos, step in enumerate(trace.steps):
        if step.id != pos:
            raise TraceError(f"step ids must be dense 0..n-1, found id {step.id} at position {pos}", step.id)
        if isinstance(step.depth, bool) or not isinstance(step.depth, int) or step.depth < 0:
            raise TraceError(f"negative or non-integer depth at step {step.id}", step.id)
        for d in step.deps:
            if d == step.id:
                raise TraceError(f"self dependency at step {step.id}", step.id)
            if d > step.id:
                raise TraceError(f"forward dependency at step {step.id}", step.id)
            if d < 0:
                raise TraceError(f"negative dependency id at step {step.id}", step.id)
        if step.embedding is not None:
            n_embedded += 1
            if dim is None:
                dim = len(step.embedding)
            elif len(step.embedding) != dim:
                raise TraceError(f"ragged embeddings at step {step.id}: dimension "
                                 f"{len(step.embedding)} != {dim}", step.id)
    if 0 < n_embedded < len(trace.steps):
        missing = next(s.id for s in trace.steps if s.embedding is None)
        raise TraceError(f"ragged embeddings: step {missing} has no embedding", missing)
    if dim == 0:
        raise TraceError("embeddings must be non-empty vectors", 0)


def _step_from_dict(obj: dict, pos: int) -> ReasoningStep:
    if not isinstance(obj, dict):
        raise TraceError(f"step at position {pos} is not an object", pos)
    try:
        sid = obj["id"]
        deps = obj.get("deps", [])
        emb = obj.get("embedding")
        if not isinstance(sid, int) or isinstance(sid, bool):
            raise TraceError(f"step id at position {pos} is not an integer", pos)
        if not isinstance(deps, list) or not all(isinstance(d, int) and not isinstance(d, bool) for d in deps):
            raise TraceError(f"deps of step {sid} must be an array of integers", sid)
        if emb is not None:
            if not isinstance(emb, list):
                raise TraceError(f"embedding of step {sid} must be an array", sid)
            emb = tuple(float(x) for x in emb)
        branch = obj.get("branch", 0)
        if not isinstance(branch, (str, int)) or isinstance(branch, bool):
            raise TraceError(f"branch of step {sid} must be a string or integer", sid)
        is_val = obj.get("is_validation", False)
        if not isinstance(is_val, bool):
            raise TraceError(f"is_validation of step {sid} must be a boolean", sid)
        text = obj.get("text", "")
        if not isinstance(text, str):
            raise TraceError(f"text of step {sid} must be a string", sid)
        return ReasoningStep(id=sid, text=text, depth=obj.get("depth", 0), branch=branch,
                             deps=frozenset(deps), is_validation=is_val, embedding=emb)
    except KeyError as exc:
        raise TraceError(f"step at position {pos} is missing key {exc.args[0]!r}", pos) from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, TraceError):
            raise
        raise TraceError(f"malformed step at position {pos}: {exc}", pos) from None


def trace_from_dict(doc: dict) -> ReasoningTrace:
    if not isinstance(doc, dict):
        raise TraceError("trace document must be a JSON object")
    for key in ("task_type", "paradigm", "steps"):
        if key not in doc:
            raise TraceError(f"trace document is missing key {key!r}")
    if not isinstance(doc["steps"], list):
        raise TraceError("steps must be an array")
    steps = tuple(_step_from_dict(s, i) for i, s in enumerate(doc["steps"]))
    label = doc.get("label") or "unknown"
    return ReasoningTrace(task_type=doc["task_type"], paradigm=doc["paradigm"], steps=steps,
                          label=label, question=doc.get("question"), prompt=doc.get("prompt"),
                          answer=doc.get("answer"))


def trace_to_dict(trace: ReasoningTrace) -> dict:
    doc = {"task_type": trace.task_type, "paradigm": trace.paradigm, "label": trace.label}
    for key in ("question", "prompt", "answer"):
        value = getattr(trace, key)
        if value is not None:
            doc[key] = value
    steps = []
    for s in trace.steps:
        obj = {"id": s.id, "text": s.text, "depth": s.depth, "branch": s.branch,
               "deps": sorted(s.deps), "is_validation": s.is_validation}
        if s.embedding is not None:
            obj["embedding"] = list(s.embedding)
        steps.append(obj)
    doc["steps"] = steps
    return doc


def parse_trace(source: Union[bytes, str, IO]) -> ReasoningTrace:
    """Parse one JSON trace document from bytes, text or a readable stream."""
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise TraceError(f"malformed document: {exc}") from None
    return trace_from_dict(doc)


def serialize_trace(trace: ReasoningTrace) -> str:
    return json.dumps(trace_to_dict(trace), sort_keys=False)


def iter_corpus(source: Union[bytes, str, IO]) -> Iterator[ReasoningTrace]:
    """Yield traces from newline-delimited JSON; blank lines are skipped."""
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    for lineno, line in enumerate(source.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            yield parse_trace(line)
        except TraceError as exc:
            raise TraceError(f"line {lineno}: {exc}", exc.step_id) from None


def load_corpus(path) -> list:
    with open(path, "r", encoding="utf-8") as fh:
        return list(iter_corpus(fh))


def write_corpus(traces: Iterable[ReasoningTrace], fh: IO) -> None:
    for t in traces:
        fh.write(serialize_trace(t))
        fh.write("\n")


def sequential_deps(trace: ReasoningTrace) -> ReasoningTrace:
    """Add the implicit i-1 -> i relation to every step after the first.

    Only ever adds dependencies, so applying it twice is a no-op.
    """
    steps = tuple(
        s if s.id == 0 or (s.id - 1) in s.deps else dataclasses.replace(s, deps=s.deps | {s.id - 1})
        for s in trace.steps
    )
    return dataclasses.replace(trace, steps=steps)
