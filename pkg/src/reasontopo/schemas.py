"""JSON Schemas for the CLI's ``--format json`` outputs."""
from .indicators import METRICS

_NUM = {"type": "number"}
_METRIC_MAP = {"type": "object", "properties": {m: _NUM for m in METRICS},
               "required": list(METRICS), "additionalProperties": False}

PROFILE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "profile",
    **_METRIC_MAP,
}

_DEVIATION_ROW = {
    "type": "object",
    "properties": {"metric": {"enum": list(METRICS)}, "value": _NUM, "lower": _NUM, "upper": _NUM,
                   "e": {"type": "number", "exclusiveMinimum": 0},
                   "direction": {"enum": ["below", "above"]}},
    "required": ["metric", "value", "lower", "upper", "e", "direction"],
    "additionalProperties": False,
}

DIAGNOSIS_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "diagnosis",
    "type": "object",
    "properties": {
        "task": {"type": "string"},
        "profile": _METRIC_MAP,
        "deviation": {
            "type": "object",
            "properties": {"e": _METRIC_MAP, "triggered": {"type": "boolean"},
                           "severity": {"type": "number", "minimum": 0},
                           "violations": {"type": "integer", "minimum": 0, "maximum": len(METRICS)},
                           "values": _METRIC_MAP},
            "required": ["e", "triggered", "severity", "violations", "values"],
            "additionalProperties": False,
        },
        "report": {
            "type": "object",
            "properties": {"r_diag": {"type": "string"}, "r_analysis": {"type": "string"},
                           "r_prompt": {"type": "string"},
                           "deviations": {"type": "array", "items": _DEVIATION_ROW},
                           "triggered": {"type": "boolean"}, "fallback": {"type": "boolean"},
                           "note": {"type": ["string", "null"]}},
            "required": ["r_diag", "r_analysis", "r_prompt", "deviations", "triggered", "fallback", "note"],
            "additionalProperties": False,
        },
    },
    "required": ["task", "profile", "deviation", "report"],
    "additionalProperties": False,
}
