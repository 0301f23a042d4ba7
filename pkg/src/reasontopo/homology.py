"""Vietoris-Rips persistent homology in dimensions 0 and 1.

H0 comes from a union-find sweep over the edges; H1 from reducing the
boundary matrix of the Rips 2-skeleton over Z/2. Columns are Python ints used
as bitsets, so a column addition is a single XOR.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple, Optional

import numpy as np

from .graph import DEFAULT_W_THRESHOLD, ReasoningGraph, build_graph
from .metricspace import DistanceConfig, composite_matrix, resolve_embeddings
from .trace import ReasoningTrace


@dataclass(frozen=True, order=True)
class PersistenceBar:
    dim: int
    birth: float
    death: float
    capped: bool = False

    @property
    def persistence(self) -> float:
        return self.death - self.birth


@dataclass(frozen=True)
class PersistenceDiagram:
    bars: tuple
    n_points: int

    def in_dim(self, dim: int) -> list:
        return [b for b in self.bars if b.dim == dim]

    def dump(self) -> str:
        return "".join(f"{b.dim} {b.birth!r} {b.death!r} {int(b.capped)}\n" for b in self.bars)


class SimplicialComplex(NamedTuple):
    vertices: list
    edges: list
    triangles: list


def _check_dist(dist) -> np.ndarray:
    d = np.asarray(dist, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("distance matrix must be square")
    if not np.all(np.isfinite(d)):
        raise ValueError("distance matrix has non-finite entries")
    return d


def pairwise_distances(trace: ReasoningTrace, cfg: Optional[DistanceConfig] = None,
                       graph: Optional[ReasoningGraph] = None,
                       w_threshold: float = DEFAULT_W_THRESHOLD) -> np.ndarray:
    """Composite semantic-logical distance between every pair of steps."""
    cfg = cfg or DistanceConfig()
    emb = resolve_embeddings(trace, cfg)
    if graph is None:
        graph = build_graph(trace, cfg, w_threshold=w_threshold, embeddings=emb)
    return composite_matrix(emb, trace.steps, graph.connectivity, cfg)


def vr_complex(dist, eps: float, max_dim: int = 2) -> SimplicialComplex:
    d = _check_dist(dist)
    n = d.shape[0]
    verts = list(range(n))
    edges = [(i, j) for i, j in combinations(range(n), 2) if d[i, j] <= eps] if max_dim >= 1 else []
    tris = []
    if max_dim >= 2:
        tris = [(i, j, k) for i, j, k in combinations(range(n), 3)
                if d[i, j] <= eps and d[i, k] <= eps and d[j, k] <= eps]
    return SimplicialComplex(verts, edges, tris)


def filtration_scales(dist) -> list:
    """Sorted distinct positive pairwise distances: the only scales where the complex changes."""
    d = _check_dist(dist)
    iu = np.triu_indices(d.shape[0], k=1)
    vals = d[iu]
    return sorted({float(v) for v in vals if v > 0})


def _find(parent: list, x: int) -> int:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def persistence(dist) -> PersistenceDiagram:
    d = _check_dist(dist)
    n = d.shape[0]
    if n == 0:
        return PersistenceDiagram(bars=(), n_points=0)

    edges = sorted(((float(d[i, j]), i, j) for i, j in combinations(range(n), 2)))
    edge_index = {(i, j): k for k, (_, i, j) in enumerate(edges)}
    diameter = edges[-1][0] if edges else 0.0

    bars = []
    parent = list(range(n))
    positive = set()
    for k, (val, i, j) in enumerate(edges):
        ri, rj = _find(parent, i), _find(parent, j)
        if ri == rj:
            positive.add(k)
            continue
        # all vertices are born at 0, so the elder rule reduces to "one bar dies here"
        parent[max(ri, rj)] = min(ri, rj)
        bars.append(PersistenceBar(0, 0.0, val))
    roots = {_find(parent, v) for v in range(n)}
    bars.extend(PersistenceBar(0, 0.0, diameter, capped=True) for _ in roots)

    if positive:
        tris = sorted((max(d[i, j], d[i, k], d[j, k]), i, j, k) for i, j, k in combinations(range(n), 3))
        pivots = {}
        for val, i, j, k in tris:
            col = (1 << edge_index[(i, j)]) | (1 << edge_index[(i, k)]) | (1 << edge_index[(j, k)])
            while col:
                low = col.bit_length() - 1
                other = pivots.get(low)
                if other is None:
                    break
                col ^= other
            if not col:
                continue
            low = col.bit_length() - 1
            pivots[low] = col
            birth = edges[low][0]
            if val > birth:
                bars.append(PersistenceBar(1, birth, float(val)))
            if len(pivots) == len(positive):
                break

    return PersistenceDiagram(bars=tuple(sorted(bars)), n_points=n)


def trace_persistence(trace: ReasoningTrace, cfg: Optional[DistanceConfig] = None,
                      w_threshold: float = DEFAULT_W_THRESHOLD) -> PersistenceDiagram:
    return persistence(pairwise_distances(trace, cfg, w_threshold=w_threshold))
