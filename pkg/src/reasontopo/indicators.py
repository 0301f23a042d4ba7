"""The six structural indicators of a reasoning trace."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Optional

from .graph import DEFAULT_W_THRESHOLD, GraphStats, ReasoningGraph, build_graph, graph_stats
from .homology import PersistenceDiagram, pairwise_distances, persistence
from .metricspace import DistanceConfig, resolve_embeddings
from .trace import ReasoningTrace

METRICS = ("f_val", "density", "f_coh", "f_pen", "f_div", "f_complexity")

METRIC_LABELS = {
    "f_val": "F_val",
    "density": "delta",
    "f_coh": "F_coh",
    "f_pen": "F_pen",
    "f_div": "F_div",
    "f_complexity": "F_complexity",
}


@dataclass(frozen=True)
class TopologicalProfile:
    f_val: float
    density: float
    f_coh: float
    f_pen: float
    f_div: float
    f_complexity: float

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TopologicalProfile":
        return cls(**{k: float(d[k]) for k in METRICS})

    def __getitem__(self, metric: str) -> float:
        if metric not in METRICS:
            raise KeyError(metric)
        return getattr(self, metric)


def validation_rate(g: ReasoningGraph) -> float:
    return sum(a.is_validation for a in g.node_attrs) / g.n


def loop_coherence(diagram: PersistenceDiagram) -> float:
    """Total H1 persistence over total H1 (birth + death); 0 without loops."""
    h1 = diagram.in_dim(1)
    num = sum(b.death - b.birth for b in h1)
    den = sum(b.birth + b.death for b in h1)
    return num / den if den > 0 else 0.0


def penetrability(g: ReasoningGraph) -> float:
    return sum(a.depth for a in g.node_attrs) / g.n


def branch_diversity(g: ReasoningGraph, entropy_base: float = math.e) -> float:
    """``|B| * base**H(P_B)`` where ``H`` is the branch-size entropy in the same base.

    The exponential form equals ``|B| * exp(H_nat)`` for every base.
    """
    counts = Counter(a.branch for a in g.node_attrs)
    n = g.n
    entropy = -sum((c / n) * math.log(c / n, entropy_base) for c in counts.values())
    return len(counts) * entropy_base ** entropy


def structural_complexity(g: ReasoningGraph, stats: Optional[GraphStats] = None) -> float:
    stats = stats or graph_stats(g)
    if stats.degenerate or stats.avg_shortest_path == 0:
        return 0.0
    return stats.n * stats.avg_deg / stats.avg_shortest_path


def profile(trace: ReasoningTrace, cfg: Optional[DistanceConfig] = None,
            w_threshold: float = DEFAULT_W_THRESHOLD, entropy_base: float = math.e) -> TopologicalProfile:
    cfg = cfg or DistanceConfig()
    emb = resolve_embeddings(trace, cfg)
    g = build_graph(trace, cfg, w_threshold=w_threshold, embeddings=emb)
    stats = graph_stats(g)
    diagram = persistence(pairwise_distances(trace, cfg, graph=g))
    return TopologicalProfile(
        f_val=validation_rate(g),
        density=stats.density,
        f_coh=loop_coherence(diagram),
        f_pen=penetrability(g),
        f_div=branch_diversity(g, entropy_base),
        f_complexity=structural_complexity(g, stats),
    )
