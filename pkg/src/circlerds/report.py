"""JSON and CSV emission with stable formatting."""
from __future__ import annotations

import csv
import json
import math
import time
from pathlib import Path

import numpy as np

from . import __version__
from .circle import CirclePoint
from .engine import GENERATOR_ID
from .kernels import BACKEND

TIMING_KEY = "timing"


def clean(obj):
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if hasattr(obj, "to_dict"):
        return clean(obj.to_dict())
    if isinstance(obj, CirclePoint):
        return obj.value
    return obj


def header(command: str, seed: int, config_hash: str) -> dict:
    return {
        "command": command,
        "seed": seed,
        "generator_id": GENERATOR_ID,
        "config_hash": config_hash,
        "version": __version__,
        "backend": BACKEND,
    }


def timing(started: float) -> dict:
    return {
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "elapsed_s": round(time.perf_counter() - started, 3),
    }


def dumps(report: dict) -> str:
    return json.dumps(clean(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, report: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(report))
    return path


def strip_timing(text: str) -> str:
    """Canonical form of a report with its timing field removed."""
    d = json.loads(text)
    d.pop(TIMING_KEY, None)
    return json.dumps(d, sort_keys=True, indent=2)


def write_csv(path, columns: dict) -> Path:
    """Write equal-length columns with a header row and 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    data = [np.asarray(columns[n]).ravel() for n in names]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*data):
            w.writerow(["%.17g" % v if isinstance(v, (float, np.floating)) else v for v in row])
    return path
