"""JSON schema of ``report.json`` written by ``renewal-extremes simulate``."""

_number = {"type": "number"}
_nullable_number = {"type": ["number", "null"]}

GRID_POINT = {
    "type": "object",
    "required": ["x", "empirical", "analytic", "stderr", "analytic_stderr", "z"],
    "properties": {
        "x": _number,
        "empirical": {"type": "number", "minimum": 0, "maximum": 1},
        "analytic": {"type": "number", "minimum": 0, "maximum": 1},
        "stderr": {"type": "number", "minimum": 0},
        "analytic_stderr": {"type": "number", "minimum": 0},
        # null when both standard errors vanish and the values differ
        "z": _nullable_number,
    },
    "additionalProperties": False,
}

RANK = {
    "type": "object",
    "required": ["k", "points", "ks", "cvm", "ks_crit", "passed"],
    "properties": {
        "k": {"type": "integer", "minimum": 1},
        "points": {"type": "array", "items": GRID_POINT},
        "ks": {"type": "number", "minimum": 0, "maximum": 1},
        "cvm": {"type": "number", "minimum": 0},
        "ks_crit": {"type": "number", "minimum": 0},
        "passed": {"type": "boolean"},
    },
    "additionalProperties": False,
}

JOINT = {
    "type": "object",
    "required": ["kind", "s", "x", "empirical", "analytic", "stderr", "analytic_stderr", "z", "passed"],
    "properties": {
        "kind": {"enum": ["top2", "fdd"]},
        "s": {"type": "array", "items": _number},
        "x": {"type": "array", "items": _number},
        "empirical": {"type": "number", "minimum": 0, "maximum": 1},
        "analytic": {"type": "number", "minimum": 0, "maximum": 1},
        "stderr": {"type": "number", "minimum": 0},
        "analytic_stderr": {"type": "number", "minimum": 0},
        "z": _nullable_number,
        "passed": {"type": "boolean"},
    },
    "additionalProperties": False,
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ComparisonReport",
    "type": "object",
    "required": ["experiment", "regime", "n_reps", "z_crit", "ks_crit", "config", "ranks", "joint", "passed"],
    "properties": {
        "experiment": {
            "enum": ["finite_mean", "finite_mean_dependent", "infinite_mean", "extremal_path_fdd"]
        },
        "regime": {"enum": ["finite", "infinite"]},
        "n_reps": {"type": "integer", "minimum": 1},
        "z_crit": {"type": "number", "minimum": 0},
        "ks_crit": {"type": "number", "minimum": 0},
        "config": {"type": "object"},
        "ranks": {"type": "array", "items": RANK},
        "joint": {"type": "array", "items": JOINT},
        "passed": {"type": "boolean"},
    },
    "additionalProperties": False,
}
