"""Weighted reasoning graph and the per-node / whole-graph statistics built on it."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import networkx as nx
import numpy as np

from .metricspace import DistanceConfig, cosine_matrix, resolve_embeddings
from .trace import ReasoningTrace

DEFAULT_W_THRESHOLD = 0.75


@dataclass(frozen=True)
class NodeAttrs:
    depth: int
    branch: object
    connectivity: float
    is_validation: bool


@dataclass(frozen=True)
class ReasoningGraph:
    n: int
    edges: tuple  # (i, j, weight) with i < j, sorted
    explicit: frozenset  # undirected pairs (i, j), i < j, that come from cited dependencies
    node_attrs: tuple

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_weighted_edges_from(self.edges)
        return g

    @property
    def connectivity(self) -> np.ndarray:
        return np.array([a.connectivity for a in self.node_attrs], dtype=float)

    def dump(self) -> str:
        """Edge list, one ``i j weight explicit_flag`` line per edge."""
        return "".join(f"{i} {j} {w!r} {int((i, j) in self.explicit)}\n" for i, j, w in self.edges)


@dataclass(frozen=True)
class GraphStats:
    n: int
    n_edges: int
    avg_deg: float
    avg_shortest_path: float
    density: float
    deg_max: int
    clustering: tuple
    degenerate: bool  # no connected pair of distinct nodes


def _degrees_and_clustering(n: int, edges) -> tuple:
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from((i, j) for i, j, _ in edges)
    deg = np.array([g.degree(v) for v in range(n)], dtype=float)
    cc = nx.clustering(g)
    return deg, np.array([cc[v] for v in range(n)], dtype=float)


def local_connectivity_scores(n: int, edges, cfg: DistanceConfig) -> np.ndarray:
    deg, cc = _degrees_and_clustering(n, edges)
    deg_max = deg.max() if n else 0.0
    if deg_max == 0:
        return np.zeros(n)
    return (cfg.alpha_deg * deg / deg_max + cfg.alpha_cc * cc) / cfg.beta


def build_graph(trace: ReasoningTrace, cfg: Optional[DistanceConfig] = None,
                w_threshold: float = DEFAULT_W_THRESHOLD, embeddings: Optional[np.ndarray] = None) -> ReasoningGraph:
    """Connect every cited dependency, plus any pair whose edge weight reaches ``w_threshold``."""
    cfg = cfg or DistanceConfig()
    emb = resolve_embeddings(trace, cfg) if embeddings is None else embeddings
    cos = cosine_matrix(emb)
    n = len(trace.steps)
    explicit = set()
    for s in trace.steps:
        for d in s.deps:
            explicit.add((d, s.id))
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            dep = (i, j) in explicit
            w = cfg.alpha_edge * float(cos[i, j]) + (1.0 - cfg.alpha_edge) * float(dep)
            if dep or w >= w_threshold:
                edges.append((i, j, w))
    c = local_connectivity_scores(n, edges, cfg)
    attrs = tuple(NodeAttrs(depth=s.depth, branch=s.branch, connectivity=float(c[s.id]),
                            is_validation=s.is_validation) for s in trace.steps)
    return ReasoningGraph(n=n, edges=tuple(edges), explicit=frozenset(explicit), node_attrs=attrs)


def local_connectivity(g: ReasoningGraph, i: int, cfg: Optional[DistanceConfig] = None) -> float:
    cfg = cfg or DistanceConfig()
    return float(local_connectivity_scores(g.n, g.edges, cfg)[i])


def graph_stats(g: ReasoningGraph) -> GraphStats:
    n = g.n
    m = len(g.edges)
    deg, cc = _degrees_and_clustering(n, g.edges)
    density = m / (n * (n - 1) / 2) if n >= 2 else 0.0

    total, pairs = 0, 0
    nxg = g.to_networkx()
    for src, lengths in nx.all_pairs_shortest_path_length(nxg):
        for dst, hops in lengths.items():
            if dst > src:
                total += hops
                pairs += 1
    degenerate = pairs == 0
    return GraphStats(n=n, n_edges=m, avg_deg=2.0 * m / n if n else 0.0,
                      avg_shortest_path=0.0 if degenerate else total / pairs,
                      density=density, deg_max=int(deg.max()) if n else 0,
                      clustering=tuple(float(x) for x in cc), degenerate=degenerate)
