import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reasontopo.graph import build_graph, graph_stats
from reasontopo.homology import PersistenceBar, PersistenceDiagram
from reasontopo.indicators import (METRICS, TopologicalProfile, branch_diversity, loop_coherence, penetrability,
                                   profile, structural_complexity, validation_rate)
from reasontopo.trace import ReasoningStep, ReasoningTrace


def make_trace(n, deps=None, depths=None, branches=None, validation=(), seed=0):
    rng = np.random.default_rng(seed)
    deps = deps if deps is not None else [[i - 1] if i else [] for i in range(n)]
    steps = tuple(ReasoningStep(id=i, text=f"s{i}", depth=(depths or [0] * n)[i],
                                branch=(branches or [0] * n)[i], deps=frozenset(deps[i]),
                                is_validation=i in validation,
                                embedding=tuple(rng.standard_normal(4)))
                  for i in range(n))
    return ReasoningTrace(task_type="T", paradigm="CoT", steps=steps)


def diagram(*bars):
    return PersistenceDiagram(bars=tuple(PersistenceBar(1, b, d) for b, d in bars), n_points=4)


def test_validation_rate():
    assert validation_rate(build_graph(make_trace(4))) == 0.0
    assert validation_rate(build_graph(make_trace(4, validation={0, 1, 2, 3}))) == 1.0
    assert validation_rate(build_graph(make_trace(7, validation={2, 5}))) == pytest.approx(2 / 7)


def test_loop_coherence():
    assert loop_coherence(diagram()) == 0.0
    r2 = math.sqrt(2)
    assert loop_coherence(diagram((1.0, r2))) == pytest.approx((r2 - 1) / (1 + r2), abs=1e-12)
    assert loop_coherence(diagram((1.0, r2))) == pytest.approx(0.1716, abs=5e-5)
    # zero-persistence bar adds nothing to the numerator
    assert loop_coherence(diagram((0.5, 0.5))) == 0.0
    assert loop_coherence(diagram((0.0, 0.0))) == 0.0


def test_penetrability():
    assert penetrability(build_graph(make_trace(3))) == 0.0
    assert penetrability(build_graph(make_trace(6, depths=[0, 1, 2, 3, 4, 5]))) == pytest.approx(2.5)
    assert penetrability(build_graph(make_trace(1, depths=[7]))) == 7.0


def test_branch_diversity_examples():
    assert branch_diversity(build_graph(make_trace(5))) == pytest.approx(1.0, abs=1e-12)
    assert branch_diversity(build_graph(make_trace(4, branches=["a", "a", "b", "b"]))) == pytest.approx(4.0)
    # sizes (3, 1): exp(H) = 1 / (0.75**0.75 * 0.25**0.25)
    expected = 2.0 / (0.75 ** 0.75 * 0.25 ** 0.25)
    assert expected == pytest.approx(3.509, abs=1e-3)
    got = branch_diversity(build_graph(make_trace(4, branches=[0, 0, 0, 1])))
    assert got == pytest.approx(expected, rel=1e-12)


def test_branch_diversity_base_invariant():
    g = build_graph(make_trace(6, branches=[0, 0, 1, 2, 2, 2]))
    assert branch_diversity(g, 2.0) == pytest.approx(branch_diversity(g))
    assert branch_diversity(g, 10.0) == pytest.approx(branch_diversity(g))


def test_structural_complexity():
    path = build_graph(make_trace(3))
    assert structural_complexity(path) == pytest.approx(3.0)
    k4 = build_graph(make_trace(4, deps=[[], [0], [0, 1], [0, 1, 2]]))
    assert structural_complexity(k4, graph_stats(k4)) == pytest.approx(12.0)
    edgeless = build_graph(make_trace(4, deps=[[], [], [], []]))
    assert structural_complexity(edgeless) == 0.0


def test_profile_linear_trace():
    p = profile(make_trace(3, depths=[0, 1, 2]))
    assert p.f_val == 0.0 and p.f_pen == 1.0
    assert p.f_div == pytest.approx(1.0)
    assert p.density == pytest.approx(2 / 3)
    assert p.f_complexity == pytest.approx(3.0)
    assert profile(make_trace(3, depths=[0, 1, 2])) == p


def test_profile_two_points_has_no_loops():
    assert profile(make_trace(2)).f_coh == 0.0


def test_profile_dict_round_trip():
    p = profile(make_trace(5, branches=[0, 0, 1, 1, 1], validation={4}))
    assert TopologicalProfile.from_dict(p.to_dict()) == p
    assert list(p.to_dict()) == list(METRICS)


@st.composite
def traces(draw):
    n = draw(st.integers(1, 8))
    seed = draw(st.integers(0, 10**6))
    rng = np.random.default_rng(seed)
    deps = [[j for j in range(i) if rng.random() < 0.4] for i in range(n)]
    return make_trace(n, deps=deps, depths=[int(x) for x in rng.integers(0, 5, n)],
                      branches=[int(x) for x in rng.integers(0, 3, n)],
                      validation={i for i in range(n) if rng.random() < 0.3}, seed=seed)


@given(traces())
@settings(max_examples=60, deadline=None)
def test_profile_ranges(t):
    p = profile(t)
    assert 0 <= p.f_val <= 1 and 0 <= p.density <= 1 and 0 <= p.f_coh <= 1
    assert p.f_pen >= 0 and p.f_div >= 1 - 1e-12 and p.f_complexity >= 0
    assert all(math.isfinite(p[m]) for m in METRICS)


@given(traces())
@settings(max_examples=40, deadline=None)
def test_branch_renaming_invariance(t):
    renamed = dataclasses.replace(t, steps=tuple(dataclasses.replace(s, branch=f"renamed-{s.branch}")
                                                 for s in t.steps))
    assert branch_diversity(build_graph(renamed)) == pytest.approx(branch_diversity(build_graph(t)))
    assert profile(renamed).to_dict() == pytest.approx(profile(t).to_dict())


@given(traces(), st.data())
@settings(max_examples=40, deadline=None)
def test_adding_validation_flag(t, data):
    unflagged = [s.id for s in t.steps if not s.is_validation]
    if not unflagged:
        return
    k = data.draw(st.sampled_from(unflagged))
    flagged = dataclasses.replace(t, steps=tuple(dataclasses.replace(s, is_validation=True) if s.id == k else s
                                                 for s in t.steps))
    assert profile(flagged).f_val - profile(t).f_val == pytest.approx(1 / len(t.steps))


@given(traces())
@settings(max_examples=30, deadline=None)
def test_step_text_irrelevant_with_embeddings(t):
    retexted = dataclasses.replace(t, steps=tuple(dataclasses.replace(s, text=f"other {s.id}") for s in t.steps))
    assert profile(retexted) == profile(t)
