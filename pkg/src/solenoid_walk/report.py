"""Report assembly and serialization (JSON ``report_v1`` and CSV tables).

Floats are written in shortest round-trip decimal form (17 significant
digits at most); non-finite floats become the strings "inf", "-inf", "nan";
exact rationals are "p/q" strings.
"""
from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
from fractions import Fraction
from importlib import resources
from typing import Any, Iterable, Sequence

import numpy as np

from .group import RationalElement

SCHEMA_VERSION = "report_v1"
FLOAT_FORMAT = {"representation": "shortest-roundtrip decimal", "precision": 17,
                "non_finite": ["inf", "-inf", "nan"], "rationals": "p/q string"}


def _float(x: float):
    if math.isfinite(x):
        return x
    if math.isnan(x):
        return "nan"
    return "inf" if x > 0 else "-inf"


def to_jsonable(obj: Any) -> Any:
    """Recursively convert results into plain JSON types."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, RationalElement):
        return {"numerator": str(obj.numerator), "level": obj.level}
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def make_report(command: str, config: dict, result: Any, version: str, backend: str,
                wall_time: float) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "tool": {"name": "solenoid-walk", "version": version, "backend": backend},
        "command": command,
        "float_format": FLOAT_FORMAT,
        "config": config,
        "result": to_jsonable(result),
        "wall_time_seconds": wall_time,
    }


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def strip_wall_time(text: str) -> str:
    """The report text without its wall-time field, for reproducibility comparisons."""
    d = json.loads(text)
    d.pop("wall_time_seconds", None)
    return json.dumps(d, indent=2)


def load_schema(name: str = SCHEMA_VERSION) -> dict:
    return json.loads(resources.files("solenoid_walk").joinpath("schemas", f"{name}.json").read_text())


def csv_table(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_csv_cell(x) for x in row])
    return buf.getvalue()


def _csv_cell(x):
    v = to_jsonable(x)
    return repr(v) if isinstance(v, float) else v
