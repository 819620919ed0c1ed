"""JSON schemas for experiment configs accepted by the command-line tool."""
from __future__ import annotations

import jsonschema

from .errors import ValidationError

_WEIGHT = {"type": "string", "enum": ["unit", "hsd", "mhd", "pd", "UNIT", "HSD", "MHD", "PD"]}

MODEL = {
    "type": "object",
    "additionalProperties": False,
    "required": ["sigma"],
    "properties": {
        "family": {"type": "string", "enum": ["normal", "t"]},
        "dof": {"type": ["integer", "null"], "minimum": 3},
        "mu": {"type": "array", "items": {"type": "number"}},
        "sigma": {
            "description": "covariance matrix, or its diagonal",
            "type": "array",
            "items": {"anyOf": [{"type": "number"}, {"type": "array", "items": {"type": "number"}}]},
        },
    },
}

FSE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["model"],
    "properties": {
        "model": MODEL,
        "n_list": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
        "reps": {"type": "integer", "minimum": 100},
        "estimators": {
            "type": "array",
            "items": {"type": "string", "pattern": "^(scm|tyler|cov|(wscm|adcm)-(HSD|MHD|PD))$"},
            "minItems": 1,
        },
        "seed": {"type": "integer"},
    },
}

SDR = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "p_list": {"type": "array", "items": {"type": "integer", "enum": [5, 10, 25, 50, 75, 100, 125, 150]}},
        "n": {"type": "integer", "minimum": 10},
        "n_test": {"type": "integer", "minimum": 1},
        "reps": {"type": "integer", "minimum": 1},
        "outliers": {"type": "array", "items": {"type": "boolean"}, "minItems": 1},
        "weight": _WEIGHT,
        "d": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer"},
    },
}

INFLUENCE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["model"],
    "properties": {
        "model": MODEL,
        "estimators": {
            "type": "array",
            "items": {
                "type": "string",
                "pattern": "^(SAMPLE_COV_EVEC|SCM_EVEC|TYLER_EVEC|(WSCM_EVEC|ADCM_EVEC)\\((HSD|MHD|PD)\\))$",
            },
            "minItems": 1,
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"type": "string", "enum": ["cartesian", "polar"]},
                "limit": {"type": "number", "exclusiveMinimum": 0},
                "step": {"type": "number", "exclusiveMinimum": 0},
                "radii": {"type": "array", "items": {"type": "number", "minimum": 0}},
                "n_angles": {"type": "integer", "minimum": 1},
            },
        },
        "index": {"type": "integer", "minimum": 0},
        "mc": {"type": "integer", "minimum": 1000},
        "eps": {"type": "number", "minimum": 1e-5, "maximum": 1e-2},
        "seed": {"type": "integer"},
    },
}

ARE = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "families": {
            "type": "array",
            "items": {"anyOf": [{"type": "string", "enum": ["normal"]}, {"type": "integer", "minimum": 5}]},
            "minItems": 1,
        },
        "weights": {"type": "array", "items": _WEIGHT, "minItems": 1},
        "p_list": {"type": "array", "items": {"type": "integer", "minimum": 2}, "minItems": 1},
        "mc": {"type": "integer", "minimum": 1000},
        "kurtosis_adjusted": {"type": "boolean"},
        "seed": {"type": "integer"},
    },
}

SCHEMAS = {"simulate-fse": FSE, "simulate-sdr": SDR, "influence-grid": INFLUENCE, "are": ARE}


def validate(doc, schema, where="config"):
    """Validate ``doc`` against ``schema``; raise :class:`ValidationError` on failure."""
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(f"{where} invalid at {path}: {exc.message}") from None
