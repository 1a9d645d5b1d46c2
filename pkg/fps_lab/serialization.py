# fps_lab/serialization.py
"""
JSON-safety helpers for manifests, alignment files and summaries.
"""

import hashlib
from collections.abc import Mapping, Sequence
from datetime import date, datetime
from pathlib import Path
from typing import Any

import numpy as np
import orjson

_DUMP_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY


def to_jsonable(obj: Any) -> Any:
    """
    Recursively convert numpy values, paths, dates and tuples into JSON-safe types.
    """
    if isinstance(obj, datetime):
        return obj.isoformat().replace("+00:00", "Z")
    if isinstance(obj, date):
        return obj.isoformat()
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if hasattr(obj, "model_dump"):
        return to_jsonable(obj.model_dump(mode="json"))

    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, Sequence) and not isinstance(obj, (str, bytes, bytearray)):
        return [to_jsonable(v) for v in obj]

    return obj


def dumps(obj: Any) -> bytes:
    return orjson.dumps(to_jsonable(obj), option=_DUMP_OPTIONS)


def write_json(path: Path, obj: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dumps(obj) + b"\n")
    return path


def read_json(path: Path) -> Any:
    return orjson.loads(Path(path).read_bytes())


def stable_hash(obj: Any, length: int = 16) -> str:
    """SHA-256 over the canonical (sorted-key, compact) dump of obj."""
    payload = orjson.dumps(to_jsonable(obj), option=orjson.OPT_SORT_KEYS)
    return hashlib.sha256(payload).hexdigest()[:length]
