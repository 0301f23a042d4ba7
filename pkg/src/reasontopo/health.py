"""Task-specific health bands, deviation scoring and the on-disk health base."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy import stats as sps

from .indicators import METRICS, TopologicalProfile

BASE_VERSION = 1
SIGMA_FLOOR = 1e-9
MIN_PROFILES = 4

# (lower, upper) probabilities; "Q4" is the sample maximum and "Q2" the median
QUANTILE_CONFIGS = {
    "Q1Q3": (0.25, 0.75),
    "Q1Q4": (0.25, 1.0),
    "Q2Q3": (0.5, 0.75),
    "Q2Q4": (0.5, 1.0),
}
MODES = ("gaussian", "iqr")
FIT_MODES = ("auto",) + MODES

MAX_ABS_SKEW = 0.5
MAX_ABS_EXCESS_KURTOSIS = 1.0


class HealthBaseError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


@dataclass(frozen=True)
class HealthBand:
    metric: str
    lower: float
    upper: float
    sigma: float
    mode: str = "iqr"
    quantile_cfg: str = "Q1Q3"

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if not self.lower <= self.upper:
            raise ValueError(f"band for {self.metric} has lower {self.lower} > upper {self.upper}")
        if not self.sigma > 0:
            raise ValueError(f"band for {self.metric} needs sigma > 0, got {self.sigma}")
        if self.mode not in MODES:
            raise ValueError(f"unknown band mode {self.mode!r}")
        if self.quantile_cfg not in QUANTILE_CONFIGS:
            raise ValueError(f"unknown quantile config {self.quantile_cfg!r}")

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "sigma": self.sigma,
                "mode": self.mode, "quantile_cfg": self.quantile_cfg}


@dataclass
class HealthBase:
    entries: dict = field(default_factory=dict)  # task -> {metric -> HealthBand}
    priority: dict = field(default_factory=dict)  # task -> tuple of metric names
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        for task, bands in self.entries.items():
            missing = [m for m in METRICS if m not in bands]
            if missing:
                raise HealthBaseError(f"task {task!r} is missing a band for metric {missing[0]!r}")
            self.priority.setdefault(task, METRICS)
        for task, prio in self.priority.items():
            unknown = [m for m in prio if m not in METRICS]
            if unknown:
                raise HealthBaseError(f"task {task!r} has unknown priority metric {unknown[0]!r}")

    def bands(self, task: str) -> dict:
        try:
            return self.entries[task]
        except KeyError:
            raise KeyError(f"task {task!r} not present in health base") from None

    def set_task(self, task: str, bands: Mapping[str, HealthBand], priority: Optional[Sequence[str]] = None):
        self.entries[task] = dict(bands)
        self.priority[task] = tuple(priority) if priority is not None else METRICS
        self.__post_init__()


@dataclass(frozen=True)
class DeviationReport:
    e: dict  # metric -> normalized deviation, >= 0
    triggered: bool
    severity: float
    violations: int
    values: dict  # metric -> observed value

    @property
    def violated(self) -> list:
        return [m for m in METRICS if self.e[m] > 0]

    def to_dict(self) -> dict:
        return {"e": {m: self.e[m] for m in METRICS}, "triggered": self.triggered,
                "severity": self.severity, "violations": self.violations,
                "values": {m: self.values[m] for m in METRICS}}


def _is_approximately_normal(x: np.ndarray) -> bool:
    if np.ptp(x) == 0:
        return False
    skew = sps.skew(x)
    kurt = sps.kurtosis(x)  # excess (Fisher)
    return abs(skew) < MAX_ABS_SKEW and abs(kurt) < MAX_ABS_EXCESS_KURTOSIS


def fit_band(metric: str, samples: Iterable[float], quantile_cfg: str = "Q1Q3", mode: str = "auto") -> HealthBand:
    """Fit one band; ``mode="auto"`` picks mean +/- sd for near-normal samples and quantiles otherwise.

    Quantiles use linear interpolation between order statistics (numpy's
    default, Hyndman-Fan type 7).
    """
    if quantile_cfg not in QUANTILE_CONFIGS:
        raise ValueError(f"unknown quantile config {quantile_cfg!r}")
    if mode not in FIT_MODES:
        raise ValueError(f"unknown band mode {mode!r}")
    x = np.asarray(list(samples), dtype=float)
    if x.size < MIN_PROFILES:
        raise InsufficientDataError(f"need at least {MIN_PROFILES} samples to fit a band, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"non-finite sample for metric {metric}")
    sigma = float(np.std(x, ddof=1))
    if sigma < SIGMA_FLOOR:
        warnings.warn(f"all samples for {metric} are (nearly) identical; sigma floored at {SIGMA_FLOOR}",
                      RuntimeWarning, stacklevel=2)
        sigma = SIGMA_FLOOR
    if mode == "auto":
        mode = "gaussian" if _is_approximately_normal(x) else "iqr"
    if mode == "gaussian":
        mu = float(np.mean(x))
        lower, upper = mu - sigma, mu + sigma
    else:
        lo_q, hi_q = QUANTILE_CONFIGS[quantile_cfg]
        lower, upper = (float(v) for v in np.quantile(x, [lo_q, hi_q]))
    return HealthBand(metric=metric, lower=lower, upper=upper, sigma=sigma, mode=mode, quantile_cfg=quantile_cfg)


def fit_bands(profiles: Sequence[TopologicalProfile], quantile_cfg: str = "Q1Q3", mode: str = "auto") -> dict:
    if len(profiles) < MIN_PROFILES:
        raise InsufficientDataError(f"need at least {MIN_PROFILES} profiles to fit bands, got {len(profiles)}")
    return {m: fit_band(m, [p[m] for p in profiles], quantile_cfg, mode) for m in METRICS}


def deviation(profile: TopologicalProfile, bands: Mapping[str, HealthBand],
              priority: Optional[Iterable[str]] = None) -> DeviationReport:
    priority = tuple(METRICS if priority is None else priority)
    e = {}
    for m in METRICS:
        if m not in bands:
            raise KeyError(f"no health band for metric {m!r}")
        band, f = bands[m], profile[m]
        if f < band.lower:
            e[m] = (band.lower - f) / band.sigma
        elif f > band.upper:
            e[m] = (f - band.upper) / band.sigma
        else:
            e[m] = 0.0
    prio_e = [e[m] for m in priority]
    return DeviationReport(
        e=e,
        triggered=any(v > 0 for v in prio_e),
        severity=max(prio_e, default=0.0),
        violations=sum(v > 0 for v in e.values()),
        values={m: profile[m] for m in METRICS},
    )


def transfer_bands(base: HealthBase, source_task: str, target_task: str) -> dict:
    """Reuse the bands learned on ``source_task`` when diagnosing ``target_task``."""
    if source_task not in base.entries:
        raise KeyError(f"unknown source task {source_task!r}")
    return dict(base.entries[source_task])


# -- persistence ----------------------------------------------------------------

def base_to_dict(base: HealthBase) -> dict:
    return {
        "version": BASE_VERSION,
        "provenance": base.provenance,
        "tasks": {
            task: {"metrics": {m: bands[m].to_dict() for m in METRICS},
                   "priority": list(base.priority.get(task, METRICS))}
            for task, bands in sorted(base.entries.items())
        },
    }


def base_from_dict(doc: dict) -> HealthBase:
    if not isinstance(doc, dict):
        raise HealthBaseError("health base must be a JSON object")
    version = doc.get("version")
    if version != BASE_VERSION:
        raise HealthBaseError(f"unsupported health base version {version!r} (expected {BASE_VERSION})")
    tasks = doc.get("tasks")
    if not isinstance(tasks, dict):
        raise HealthBaseError("health base is missing the 'tasks' object")
    entries, priority = {}, {}
    for task, body in tasks.items():
        metrics = body.get("metrics") if isinstance(body, dict) else None
        if not isinstance(metrics, dict):
            raise HealthBaseError(f"task {task!r} has no 'metrics' object")
        bands = {}
        for m in METRICS:
            if m not in metrics:
                raise HealthBaseError(f"task {task!r} is missing a band for metric {m!r}")
            spec = metrics[m]
            try:
                bands[m] = HealthBand(metric=m, lower=float(spec["lower"]), upper=float(spec["upper"]),
                                      sigma=float(spec["sigma"]), mode=spec.get("mode", "iqr"),
                                      quantile_cfg=spec.get("quantile_cfg", "Q1Q3"))
            except (KeyError, TypeError, ValueError) as exc:
                raise HealthBaseError(f"task {task!r} metric {m!r}: invalid band ({exc})") from None
        entries[task] = bands
        priority[task] = tuple(body.get("priority", METRICS))
    return HealthBase(entries=entries, priority=priority, provenance=dict(doc.get("provenance") or {}))


def save_base(base: HealthBase, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(base_to_dict(base), fh, indent=2)
        fh.write("\n")


def load_base(path) -> HealthBase:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise HealthBaseError(f"health base file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise HealthBaseError(f"health base is not valid JSON: {exc}") from None
    return base_from_dict(doc)
