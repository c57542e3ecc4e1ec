"""Deterministic CSV/JSON writers shared by the library and the CLI.

All floats are rendered at 17 significant digits so identical inputs
produce byte-identical files; data files carry no timestamps. Run
directories are keyed by a short hash of the fully resolved
configuration, so re-running a config lands on the same id.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

FLOAT_FMT = "%.17g"


def fmt_float(value) -> str:
    return FLOAT_FMT % float(value)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Write rows of numbers (or strings) under a header line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(
                item if isinstance(item, str) else fmt_float(item) for item in row
            ) + "\n")


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def write_json(path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_id(config: dict) -> str:
    """Short content hash of a resolved configuration (stable across runs)."""
    canonical = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha1(canonical.encode()).hexdigest()[:12]
