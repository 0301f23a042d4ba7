"""Seeded synthetic traces shaped like CoT, ToT and GoT reasoning.

CoT: one branch, a dependency-annotated chain with occasional skip links.
ToT: a root plus several branches expanded as sub-chains, merged at the end.
GoT: branches that cross-link and a verification pass that walks back to the
premise; embeddings are laid out around a circle so the reasoning loop shows
up as an H1 class.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .trace import ReasoningStep, ReasoningTrace

EMB_DIM = 16
GEN_PARADIGMS = ("CoT", "ToT", "GoT")
BASE_PROMPT = ("Please reason step-by-step. In each step, cite which previous step "
               "(or condition) you used as a dependency.")


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _cot(rng: np.random.Generator, k: int):
    n = int(rng.integers(5, 9))
    topic = rng.standard_normal(EMB_DIM)
    steps = []
    for i in range(n):
        deps = {i - 1} if i else set()
        if i >= 3 and rng.random() < 0.3:
            deps.add(int(rng.integers(0, i - 1)))
        emb = _unit(topic + 0.8 * rng.standard_normal(EMB_DIM))
        steps.append(dict(depth=i, branch=0, deps=deps, is_validation=bool(i == n - 1 and rng.random() < 0.3),
                          emb=emb))
    return steps


def _tot(rng: np.random.Generator, k: int):
    n_branch = int(rng.integers(2, 4))
    topic = rng.standard_normal(EMB_DIM)
    steps = [dict(depth=0, branch="root", deps=set(), is_validation=False,
                  emb=_unit(topic + 0.5 * rng.standard_normal(EMB_DIM)))]
    leaves = []
    for b in range(n_branch):
        direction = rng.standard_normal(EMB_DIM)
        parent = 0
        for level in range(1, int(rng.integers(2, 4)) + 1):
            steps.append(dict(depth=level, branch=f"b{b}", deps={parent},
                              is_validation=bool(rng.random() < 0.25),
                              emb=_unit(topic + direction + 0.6 * rng.standard_normal(EMB_DIM))))
            parent = len(steps) - 1
        leaves.append(parent)
    depth = max(steps[i]["depth"] for i in leaves) + 1
    steps.append(dict(depth=depth, branch="root", deps=set(leaves), is_validation=True,
                      emb=_unit(topic + 0.5 * rng.standard_normal(EMB_DIM))))
    return steps


def _got(rng: np.random.Generator, k: int):
    n = int(rng.integers(7, 11))
    n_branch = int(rng.integers(2, 4))
    u, v = (_unit(x) for x in np.linalg.qr(rng.standard_normal((EMB_DIM, 2)))[0].T)
    steps = []
    for i in range(n):
        theta = 2 * np.pi * i / n
        emb = _unit(np.cos(theta) * u + np.sin(theta) * v + 0.05 * rng.standard_normal(EMB_DIM))
        if i == 0:
            deps = set()
        else:
            deps = {i - 1}
            if i >= 2 and rng.random() < 0.5:
                deps.add(int(rng.integers(0, i - 1)))
        is_val = i >= n - 2
        if i == n - 1:
            deps.add(0)  # close the verification loop on the premise
        steps.append(dict(depth=min(i, 1 + i % 3), branch=f"b{i % n_branch}" if 0 < i < n - 1 else "root",
                          deps=deps, is_validation=is_val, emb=emb))
    return steps


_BUILDERS = {"CoT": _cot, "ToT": _tot, "GoT": _got}


def generate(paradigm: str, n: int, seed: int, task_type: str = "synthetic",
             p_incorrect: float = 0.1) -> list:
    """``n`` deterministic traces of the given paradigm."""
    if paradigm not in _BUILDERS:
        raise ValueError(f"cannot generate {paradigm!r} fixtures; choose from {GEN_PARADIGMS}")
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.default_rng([seed, GEN_PARADIGMS.index(paradigm)])
    out = []
    for k in range(n):
        raw = _BUILDERS[paradigm](rng, k)
        steps = tuple(
            ReasoningStep(id=i, text=f"{paradigm} trace {k} step {i}", depth=int(s["depth"]),
                          branch=s["branch"], deps=frozenset(int(d) for d in s["deps"]),
                          is_validation=bool(s["is_validation"]),
                          embedding=tuple(round(float(x), 12) for x in s["emb"]))
            for i, s in enumerate(raw)
        )
        label = "incorrect" if rng.random() < p_incorrect else "correct"
        out.append(ReasoningTrace(task_type=task_type, paradigm=paradigm, steps=steps, label=label,
                                  question=f"Synthetic {paradigm} problem {k}", prompt=BASE_PROMPT))
    return out


def linear_trace(depths=(0, 1, 2), task_type: str = "synthetic", embeddings: Optional[list] = None,
                 validation: Optional[set] = None) -> ReasoningTrace:
    """Bare chain with deps ``i-1 -> i``; handy for examples and tests."""
    validation = validation or set()
    steps = tuple(
        ReasoningStep(id=i, text=f"step {i}", depth=d, branch=0,
                      deps=frozenset({i - 1}) if i else frozenset(), is_validation=i in validation,
                      embedding=None if embeddings is None else tuple(embeddings[i]))
        for i, d in enumerate(depths)
    )
    return ReasoningTrace(task_type=task_type, paradigm="CoT", steps=steps, label="correct")
