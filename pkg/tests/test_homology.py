import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import betti, brute_force_bars
from reasontopo.homology import filtration_scales, pairwise_distances, persistence, vr_complex
from reasontopo.trace import ReasoningStep, ReasoningTrace

SQRT2 = math.sqrt(2)
SQUARE = np.array([[0, 1, SQRT2, 1],
                   [1, 0, 1, SQRT2],
                   [SQRT2, 1, 0, 1],
                   [1, SQRT2, 1, 0]])


def positive_bars(diagram):
    return sorted((b.dim, b.birth, b.death) for b in diagram.bars if b.death > b.birth)


def test_pairwise_distances_single_node():
    t = ReasoningTrace("T", "CoT", (ReasoningStep(0, "x"),))
    assert pairwise_distances(t).shape == (1, 1)
    assert pairwise_distances(t)[0, 0] == 0.0


def test_pairwise_distances_identical_nodes():
    steps = (ReasoningStep(0, "x", embedding=(1.0, 1.0)), ReasoningStep(1, "x", embedding=(1.0, 1.0)))
    d = pairwise_distances(ReasoningTrace("T", "CoT", steps))
    assert np.array_equal(d, np.zeros((2, 2)))


def test_pairwise_distances_symmetric():
    steps = tuple(ReasoningStep(i, f"s{i}", depth=i % 3, branch=i % 2, deps=frozenset({i - 1}) if i else frozenset())
                  for i in range(6))
    d = pairwise_distances(ReasoningTrace("T", "GoT", steps))
    assert np.array_equal(d, d.T)


def test_vr_complex_examples():
    assert vr_complex(SQUARE, 0.5) == ([0, 1, 2, 3], [], [])
    full = vr_complex(SQUARE, SQRT2)
    assert len(full.edges) == 6 and len(full.triangles) == 4
    cyc = vr_complex(SQUARE, 1.0)
    assert cyc.edges == [(0, 1), (0, 3), (1, 2), (2, 3)] and cyc.triangles == []
    assert betti(SQUARE, 1.0) == (1, 1)


def test_uniform_points_merge_at_one():
    n = 5
    d = np.ones((n, n)) - np.eye(n)
    dg = persistence(d)
    h0 = dg.in_dim(0)
    assert len(h0) == n
    assert sum(b.capped for b in h0) == 1
    assert sorted(b.death for b in h0 if not b.capped) == [1.0] * (n - 1)
    assert dg.in_dim(1) == []


def test_square_has_one_loop():
    h1 = persistence(SQUARE).in_dim(1)
    assert [(b.birth, b.death) for b in h1] == [(1.0, SQRT2)]
    assert brute_force_bars(SQUARE)[-1] == (1, 1.0, SQRT2)


def test_triangle_fills_immediately():
    d = np.ones((3, 3)) - np.eye(3)
    assert persistence(d).in_dim(1) == []
    assert betti(d, 1.0) == (1, 0)


def test_filtration_scales():
    assert filtration_scales(SQUARE) == [1.0, SQRT2]
    assert filtration_scales(np.full((3, 3), 2.0) - 2 * np.eye(3)) == [2.0]
    assert filtration_scales(np.zeros((1, 1))) == []


def test_capped_bar_flag_and_dump():
    dg = persistence(SQUARE)
    capped = [b for b in dg.bars if b.capped]
    assert len(capped) == 1 and capped[0].death == SQRT2
    lines = dg.dump().splitlines()
    assert len(lines) == 5
    assert lines[-1] == f"1 1.0 {SQRT2!r} 0"


def test_single_point():
    dg = persistence(np.zeros((1, 1)))
    assert len(dg.bars) == 1 and dg.bars[0].capped and dg.n_points == 1


def _rand_dist(rng, n, kind):
    if kind == "euclid":
        x = rng.standard_normal((n, 2))
        return np.linalg.norm(x[:, None] - x[None], axis=-1)
    m = rng.integers(1, 4, (n, n)).astype(float) if kind == "ties" else rng.random((n, n))
    m = np.triu(m, 1)
    return m + m.T


@given(st.integers(1, 8), st.integers(0, 10**6), st.sampled_from(["euclid", "ties", "uniform"]))
@settings(max_examples=150, deadline=None)
def test_matches_brute_force(n, seed, kind):
    d = _rand_dist(np.random.default_rng(seed), n, kind)
    got, want = positive_bars(persistence(d)), brute_force_bars(d)
    assert len(got) == len(want)
    for (gd, gb, ge), (wd, wb, we) in zip(got, want):
        assert gd == wd and abs(gb - wb) <= 1e-9 and abs(ge - we) <= 1e-9


@given(st.integers(2, 8), st.integers(0, 10**6), st.floats(0.1, 10))
@settings(max_examples=60, deadline=None)
def test_scaling_and_relabeling(n, seed, scale):
    rng = np.random.default_rng(seed)
    d = _rand_dist(rng, n, "uniform")
    base = persistence(d)
    scaled = persistence(d * scale)
    for a, b in zip(base.bars, scaled.bars):
        assert (a.dim, a.capped) == (b.dim, b.capped)
        assert b.birth == pytest.approx(a.birth * scale, rel=1e-12, abs=1e-15)
        assert b.death == pytest.approx(a.death * scale, rel=1e-12, abs=1e-15)
    perm = rng.permutation(n)
    permuted = persistence(d[np.ix_(perm, perm)])
    assert sum(b.death for b in permuted.in_dim(0)) == pytest.approx(sum(b.death for b in base.in_dim(0)))
    assert len(base.in_dim(0)) == n
    assert sum(not b.capped for b in base.in_dim(0)) == n - 1
    assert all(b.death >= b.birth for b in base.bars)
