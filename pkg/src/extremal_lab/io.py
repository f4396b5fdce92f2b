"""JSON/CSV emission for branch files and reports.

Floats are written with 17 significant digits so that parse -> emit
reproduces the bytes. Non-finite floats become null.
"""
from __future__ import annotations

import csv
import enum
import io
import json
import math
from typing import Any, Iterable, Sequence

import jsonschema
import numpy as np

SCHEMA_VERSION = 1

_NUM = {"type": ["number", "null"]}

BRANCH_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "kind", "seed", "config", "status", "sigma",
                 "lambda_star", "records"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "kind": {"const": "branch"},
        "seed": {"type": "integer"},
        "config": {
            "type": "object",
            "required": ["family", "s", "N", "R", "singular_rule", "kernel_family", "weight"],
            "properties": {
                "family": {"enum": ["gelfand", "lane_emden", "mems", "gradient"]},
                "p": _NUM, "q": _NUM,
                "s": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "N": {"type": "integer", "minimum": 1},
                "R": {"type": "number", "exclusiveMinimum": 0},
                "singular_rule": {"enum": ["cell_exact", "taylor2"]},
                "kernel_family": {"enum": ["fractional_laplacian", "weighted_even"]},
                "weight": {"type": "number", "minimum": 0},
            },
        },
        "status": {"enum": ["FoldFound", "StepLimit", "ConstraintHit"]},
        "sigma": {"type": "number", "exclusiveMinimum": 0},
        "scalar": {"type": "boolean"},
        "lambda_star": {
            "type": "object",
            "required": ["estimate", "lower", "upper"],
            "properties": {"estimate": _NUM, "lower": _NUM, "upper": _NUM},
        },
        "records": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["lambda", "gamma", "sup_u", "sup_v", "stability_indicator",
                             "residual", "newton_iters", "u", "v"],
                "properties": {
                    "lambda": {"type": "number"}, "gamma": {"type": "number"},
                    "sup_u": {"type": "number"}, "sup_v": {"type": "number"},
                    "stability_indicator": _NUM, "residual": {"type": "number"},
                    "newton_iters": {"type": "integer", "minimum": 0},
                    "u": {"type": "array", "items": {"type": "number"}},
                    "v": {"type": "array", "items": {"type": "number"}},
                },
            },
        },
    },
}

REPORT_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "kind", "command", "seed", "passed", "results"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "kind": {"const": "report"},
        "command": {"type": "string"},
        "seed": {"type": "integer"},
        "passed": {"type": "boolean"},
        "results": {"type": "array"},
    },
}


class SchemaError(ValueError):
    pass


def validate(doc: dict, schema: dict) -> None:
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        msg = exc.message if len(exc.message) <= 200 else exc.message[:200] + "..."
        raise SchemaError(f"{'/'.join(map(str, exc.absolute_path)) or '<root>'}: {msg}") from exc


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    out = "%.17g" % x
    if not any(c in out for c in ".e"):
        out += ".0"  # keep floats floats on re-parse
    return out


def dumps(obj: Any, indent: int = 1, _level: int = 0) -> str:
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, enum.Enum):
        return dumps(obj.value, indent, _level)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) or v is None for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def loads(text: str) -> Any:
    return json.loads(text)


def branch_to_doc(branch, config: dict, seed: int = 0) -> dict:
    upper = branch.lambda_upper
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "branch",
        "seed": int(seed),
        "config": dict(config),
        "status": branch.status,
        "sigma": float(branch.sigma),
        "scalar": bool(branch.scalar),
        "lambda_star": {"estimate": branch.lambda_star, "lower": branch.lambda_lower,
                        "upper": upper if math.isfinite(upper) else None},
        "records": [{
            "lambda": r.lam, "gamma": r.gam, "sup_u": r.sup_u, "sup_v": r.sup_v,
            "stability_indicator": r.stability_indicator, "residual": r.residual_norm,
            "newton_iters": r.newton_iters, "u": np.asarray(r.u).tolist(), "v": np.asarray(r.v).tolist(),
        } for r in branch.records],
    }


BRANCH_CSV_COLUMNS = ("lambda", "gamma", "sup_u", "sup_v", "stability_indicator", "residual",
                      "newton_iters")


def table_csv(rows: Iterable[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(["" if row.get(c) is None else
                    (_fmt_float(float(row[c])) if isinstance(row[c], (float, np.floating)) else
                     getattr(row[c], "value", row[c]))
                    for c in columns])
    return buf.getvalue()


def branch_csv(doc: dict) -> str:
    return table_csv(doc["records"], BRANCH_CSV_COLUMNS)
