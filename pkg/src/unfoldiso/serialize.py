"""Deterministic JSON and CSV output: floats with 17 significant digits, complex as [re, im]."""
from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path

import numpy as np


def fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == 0.0:
        return "0.0"  # folds -0.0 as well
    s = format(x, ".17g")
    return s if any(ch in s for ch in ".e") else s + ".0"


def to_plain(obj):
    """Recursively convert numpy data, complex numbers and dataclasses into JSON-ready values.

    Complex scalars become [re, im]; floats stay floats; drops nothing else.
    """
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if obj is None or isinstance(obj, str):
        return obj
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_plain({f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)})
    if hasattr(obj, "to_dict"):
        return to_plain(obj.to_dict())
    if hasattr(obj, "re") and hasattr(obj, "eps"):  # dual numbers
        return {"re": to_plain(obj.re), "h": to_plain(obj.eps)}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _dump(v, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_dump(x, indent, level + 1)}" for k, x in v.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(v, list):
        if not v:
            return "[]"
        if all(not isinstance(x, (dict, list)) for x in v):
            return "[" + ", ".join(_dump(x, indent, level + 1) for x in v) + "]"
        return "[\n" + ",\n".join(pad + _dump(x, indent, level + 1) for x in v) + "\n" + end + "]"
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, float):
        return fmt(v)
    if isinstance(v, int):
        return str(v)
    return json.dumps(v)


def dumps(obj, indent: int = 1) -> str:
    return _dump(to_plain(obj), indent, 0) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


def write_trajectories_csv(path, runs) -> Path:
    """runs: iterable of (run_id, Trajectory). Columns: run, t, re_z, im_z, dist."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["run,t,re_z,im_z,dist"]
    for run_id, traj in runs:
        dist = traj.distance()
        for t, z, d in zip(traj.t, traj.z, dist):
            lines.append(f"{run_id},{fmt(t)},{fmt(z.real)},{fmt(z.imag)},{fmt(d)}")
    path.write_text("\n".join(lines) + "\n")
    return path
