"""Deterministic JSON/CSV output.

Floats are printed with 17 significant digits, non-finite floats as the
strings "inf", "-inf", "nan", complex numbers as {"re": .., "im": ..}.
Files are written to a temporary sibling and renamed into place.
"""
from __future__ import annotations

import csv
import dataclasses
import enum
import io
import json
import math
import os
import re
import tempfile
from pathlib import Path

import numpy as np

SCHEMA = 1
_FLOAT_TOKEN = re.compile(r'"@@F([^"@]*)@@"')


def _float(v: float):
    if math.isfinite(v):
        return f"@@F{v:.17g}@@"
    if math.isnan(v):
        return "nan"
    return "inf" if v > 0 else "-inf"


def to_jsonable(obj):
    """Plain JSON tree with floats replaced by format tokens."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _float(float(obj.real)), "im": _float(float(obj.imag))}
    if isinstance(obj, enum.Enum):
        return to_jsonable(obj.value)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if dataclasses.is_dataclass(obj):
        return to_jsonable({f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)})
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    text = json.dumps(to_jsonable(obj), indent=2, sort_keys=False, ensure_ascii=False)
    return _FLOAT_TOKEN.sub(r"\1", text) + "\n"


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, payload: dict) -> None:
    """Write a document with the schema version as its first key."""
    _atomic_write(Path(path), dumps({"schema": SCHEMA, **payload}))


def read_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def parse_float(v) -> float:
    """Inverse of the float encoding (accepts the non-finite strings)."""
    if isinstance(v, str):
        return float(v)
    return float(v)


def parse_complex(v) -> complex:
    if isinstance(v, dict):
        return complex(parse_float(v["re"]), parse_float(v["im"]))
    return complex(parse_float(v))


def write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{v:.17g}" if isinstance(v, (float, np.floating)) else v for v in row])
    _atomic_write(Path(path), buf.getvalue())
