"""Persistent-homology diagnostics and prompt repair for LLM reasoning traces."""

__version__ = "0.1.0"

from .trace import ReasoningStep, ReasoningTrace, TraceError, parse_trace, sequential_deps, serialize_trace
from .metricspace import DistanceConfig
from .graph import build_graph, graph_stats
from .homology import PersistenceBar, PersistenceDiagram, persistence
from .indicators import METRICS, TopologicalProfile, profile
from .health import HealthBand, HealthBase, deviation, fit_bands, load_base, save_base
from .analysis import spearman_matrix, wasserstein1
from .agent import RepairReport, render_report, select_strategies
from .config import GlobalConfig

__all__ = [
    "ReasoningStep", "ReasoningTrace", "TraceError", "parse_trace", "sequential_deps", "serialize_trace",
    "DistanceConfig", "build_graph", "graph_stats", "PersistenceBar", "PersistenceDiagram", "persistence",
    "METRICS", "TopologicalProfile", "profile", "HealthBand", "HealthBase", "deviation", "fit_bands",
    "load_base", "save_base", "spearman_matrix", "wasserstein1", "RepairReport", "render_report",
    "select_strategies", "GlobalConfig",
]
