"""Matrix and trajectory I/O.

Matrices travel as CSV (one row per line, comma-separated decimals) or as a
JSON object {"rows", "cols", "entries"} with entries flattened row-major.
Numbers are written with 17 significant digits so decimal text round-trips
the underlying doubles exactly; outputs contain no timestamps and identical
inputs produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dynamics import TrajectoryRecord


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def matrix_to_csv(m: np.ndarray) -> str:
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    return "\n".join(",".join(fmt(v) for v in row) for row in m) + "\n"


def matrix_from_csv(text: str) -> np.ndarray:
    rows = []
    width = None
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            row = [float(tok) for tok in line.split(",")]
        except ValueError as exc:
            raise ValueError(f"malformed CSV at line {ln}: {exc}") from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ValueError(f"ragged CSV: line {ln} has {len(row)} fields, expected {width}")
        rows.append(row)
    if not rows:
        raise ValueError("empty matrix file")
    return np.array(rows, dtype=np.float64)


def matrix_to_json(m: np.ndarray) -> str:
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    obj = {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "entries": [float(v) for v in m.ravel()]}
    return json.dumps(obj, indent=2) + "\n"


def matrix_from_json(text: str) -> np.ndarray:
    try:
        obj = json.loads(text)
        rows, cols = int(obj["rows"]), int(obj["cols"])
        entries = np.asarray(obj["entries"], dtype=np.float64)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from None
    if entries.size != rows * cols:
        raise ValueError(f"matrix JSON claims {rows}x{cols} but has {entries.size} entries")
    return entries.reshape(rows, cols)


def load_matrix(path, fmt_hint: str | None = None) -> np.ndarray:
    path = Path(path)
    text = path.read_text()
    kind = fmt_hint or ("json" if path.suffix.lower() == ".json" else "csv")
    return matrix_from_json(text) if kind == "json" else matrix_from_csv(text)


def save_matrix(path, m: np.ndarray, fmt_hint: str | None = None) -> None:
    path = Path(path)
    kind = fmt_hint or ("json" if path.suffix.lower() == ".json" else "csv")
    path.write_text(matrix_to_json(m) if kind == "json" else matrix_to_csv(m))


def trajectory_to_csv(rec: TrajectoryRecord) -> str:
    n = rec.states.shape[1]
    cols = ["t"] + [f"x{i + 1}" for i in range(n)]
    if rec.volumes is not None:
        cols.append("vol")
    lines = [",".join(cols)]
    for i, t in enumerate(rec.times):
        vals = [fmt(t)] + [fmt(v) for v in rec.states[i]]
        if rec.volumes is not None:
            vals.append(fmt(rec.volumes[i]))
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


def trajectory_to_json(rec: TrajectoryRecord) -> str:
    obj = {
        "system": rec.system,
        "times": [float(t) for t in rec.times],
        "states": [[float(v) for v in row] for row in rec.states],
    }
    if rec.volumes is not None:
        obj["volumes"] = [float(v) for v in rec.volumes]
    return json.dumps(obj, indent=2) + "\n"


def dump_json(obj) -> str:
    """Deterministic JSON for reports and summaries."""
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=True) + "\n"
