"""Cross-metric Spearman correlation and cross-task 1-Wasserstein comparison."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .indicators import METRIC_LABELS, METRICS, TopologicalProfile


@dataclass(frozen=True)
class MetricSampleSet:
    task_type: str
    metric: str
    values: tuple

    def __post_init__(self):
        if not self.values:
            raise ValueError(f"empty sample set for {self.task_type}/{self.metric}")
        if not all(np.isfinite(v) for v in self.values):
            raise ValueError(f"non-finite value in sample set {self.task_type}/{self.metric}")


@dataclass(frozen=True)
class CorrelationMatrix:
    metrics: tuple
    values: np.ndarray
    undefined: frozenset  # metrics whose column was constant; their off-diagonal rho is reported as 0

    def to_dict(self) -> dict:
        return {"metrics": list(self.metrics),
                "matrix": [[float(v) for v in row] for row in self.values],
                "undefined": sorted(self.undefined)}


def sample_sets(task_type: str, profiles: Sequence[TopologicalProfile]) -> dict:
    return {m: MetricSampleSet(task_type, m, tuple(p[m] for p in profiles)) for m in METRICS}


def spearman_matrix(profiles: Sequence[TopologicalProfile], metrics: Sequence[str] = METRICS) -> CorrelationMatrix:
    """Pairwise Spearman rho using average ranks for ties."""
    if len(profiles) < 3:
        raise ValueError(f"need at least 3 profiles for rank correlation, got {len(profiles)}")
    metrics = tuple(metrics)
    cols = np.array([[p[m] for p in profiles] for m in metrics], dtype=float)
    ranks = np.array([rankdata(c, method="average") for c in cols])
    centered = ranks - ranks.mean(axis=1, keepdims=True)
    norms = np.linalg.norm(centered, axis=1)
    constant = norms == 0
    k = len(metrics)
    rho = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            if constant[i] or constant[j]:
                r = 0.0
            else:
                r = float(np.clip(centered[i] @ centered[j] / (norms[i] * norms[j]), -1.0, 1.0))
            rho[i, j] = rho[j, i] = r
    return CorrelationMatrix(metrics=metrics, values=rho,
                             undefined=frozenset(m for m, c in zip(metrics, constant) if c))


def _values(x) -> np.ndarray:
    vals = x.values if isinstance(x, MetricSampleSet) else x
    arr = np.sort(np.asarray(vals, dtype=float))
    if arr.size == 0:
        raise ValueError("empty sample")
    return arr


def wasserstein1(a, b) -> float:
    """1-Wasserstein distance between two empirical distributions.

    Integrates ``|F_a^-1(u) - F_b^-1(u)|`` over ``u in (0, 1]`` exactly: both
    quantile functions are step functions, constant between the merged
    breakpoints ``k/|a|`` and ``k/|b|``.
    """
    xa, xb = _values(a), _values(b)
    n, m = xa.size, xb.size
    if n == m:
        return float(np.mean(np.abs(xa - xb)))
    cuts = np.union1d(np.arange(1, n + 1) / n, np.arange(1, m + 1) / m)
    cuts[-1] = 1.0
    lefts = np.concatenate([[0.0], cuts[:-1]])
    widths = cuts - lefts
    mids = (lefts + cuts) / 2.0
    ia = np.minimum((mids * n).astype(int), n - 1)
    ib = np.minimum((mids * m).astype(int), m - 1)
    return float(np.sum(widths * np.abs(xa[ia] - xb[ib])))


def transfer_report(source: Sequence[TopologicalProfile], target: Sequence[TopologicalProfile]) -> dict:
    """Per-metric W1 between the source-task and target-task indicator distributions (raw scales)."""
    if not source or not target:
        raise ValueError("both corpora must contain at least one profile")
    return {m: wasserstein1([p[m] for p in source], [p[m] for p in target]) for m in METRICS}


def format_w1_table(columns: Mapping[str, Mapping[str, float]]) -> str:
    """Render ``{column_name: {metric: w1}}`` as a metric-by-column text table."""
    names = list(columns)
    width = max([len(n) for n in names] + [8])
    lines = ["# W1 on raw indicator scales",
             f"{'metric':<14}" + "".join(f"{n:>{width + 2}}" for n in names)]
    for m in METRICS:
        lines.append(f"{METRIC_LABELS[m]:<14}" + "".join(f"{columns[n][m]:>{width + 2}.4f}" for n in names))
    return "\n".join(lines) + "\n"


def format_correlation_table(cm: CorrelationMatrix) -> str:
    labels = [METRIC_LABELS.get(m, m) for m in cm.metrics]
    width = max(len(x) for x in labels) + 2
    lines = [f"{'metric':<14}" + "".join(f"{x:>{width}}" for x in labels)]
    for lab, row in zip(labels, cm.values):
        lines.append(f"{lab:<14}" + "".join(f"{v:>{width}.2f}" for v in row))
    if cm.undefined:
        lines.append("# constant columns (rho undefined, shown as 0): " + ", ".join(sorted(cm.undefined)))
    return "\n".join(lines) + "\n"
