"""Global configuration: defaults < TOML config file < command-line flags.

Example file::

    w_threshold = 0.75
    quantile_cfg = "Q1Q3"
    band_mode = "auto"        # auto | gaussian | iqr
    entropy_base = 2.718281828459045
    format = "text"
    base = "health_base.json"

    [distance]
    lambda_s = 0.7
    lambda_l = 0.3
    alpha_edge = 0.7
"""
from __future__ import annotations

import dataclasses
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .graph import DEFAULT_W_THRESHOLD
from .health import FIT_MODES, QUANTILE_CONFIGS
from .metricspace import DistanceConfig

FORMATS = ("text", "json")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GlobalConfig:
    distance: DistanceConfig = field(default_factory=DistanceConfig)
    w_threshold: float = DEFAULT_W_THRESHOLD
    entropy_base: float = math.e
    quantile_cfg: str = "Q1Q3"
    band_mode: str = "auto"
    base: Optional[str] = None
    format: str = "text"

    def __post_init__(self):
        if self.quantile_cfg not in QUANTILE_CONFIGS:
            raise ConfigError(f"quantile_cfg must be one of {sorted(QUANTILE_CONFIGS)}, got {self.quantile_cfg!r}")
        if self.band_mode not in FIT_MODES:
            raise ConfigError(f"band_mode must be one of {FIT_MODES}, got {self.band_mode!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if not (self.entropy_base > 0 and self.entropy_base != 1):
            raise ConfigError("entropy_base must be positive and != 1")


_TOP_KEYS = {f.name for f in dataclasses.fields(GlobalConfig)} - {"distance"}
_DIST_KEYS = {f.name for f in dataclasses.fields(DistanceConfig)}


def from_mapping(doc: dict, base: Optional[GlobalConfig] = None) -> GlobalConfig:
    base = base or GlobalConfig()
    doc = dict(doc)
    dist_doc = doc.pop("distance", {}) or {}
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    unknown = set(dist_doc) - _DIST_KEYS
    if unknown:
        raise ConfigError(f"unknown [distance] keys: {sorted(unknown)}")
    try:
        dist = dataclasses.replace(base.distance, **dist_doc)
        return dataclasses.replace(base, distance=dist, **doc)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> GlobalConfig:
    cfg = GlobalConfig()
    if path:
        try:
            with open(path, "rb") as fh:
                cfg = from_mapping(tomllib.load(fh), cfg)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid config file {path}: {exc}") from None
    if overrides:
        cfg = from_mapping({k: v for k, v in overrides.items() if v is not None}, cfg)
    return cfg
