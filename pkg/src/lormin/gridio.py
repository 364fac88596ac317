"""Deterministic CSV/JSON writers for grids, meshes and reports.

Numbers are written with 17 significant digits ('.' decimal, no locale) so
doubles round-trip exactly; identical data produces byte-identical files.
Timestamps appear only inside a JSON summary's ``metadata`` block.
"""
from __future__ import annotations

import csv
import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np


def fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[float]]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell if isinstance(cell, str) else fmt(cell) for cell in row])


def write_mesh_csv(path, us: np.ndarray, vs: np.ndarray, positions: np.ndarray):
    """Columns u, v, x1..x4; row order is u-major, matching the lattice."""
    rows = (
        (us[i], vs[j], *positions[i, j])
        for i in range(len(us))
        for j in range(len(vs))
    )
    write_csv(path, ["u", "v", "x1", "x2", "x3", "x4"], rows)


def write_residual_csv(path, report):
    rows = (
        (report.grid[k, 0], report.grid[k, 1], report.r1[k], report.r2[k])
        for k in range(report.grid.shape[0])
    )
    write_csv(path, ["u", "v", "r1", "r2"], rows)


def _jsonable(value):
    if isinstance(value, Mapping):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        x = float(value)
        return None if math.isnan(x) else x
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def write_json_summary(path, payload: Mapping, with_timestamp: bool = True):
    """Write a summary document; volatile data is confined to 'metadata'."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = dict(_jsonable(payload))
    if with_timestamp:
        doc["metadata"] = dict(doc.get("metadata", {}))
        doc["metadata"]["written_at"] = datetime.now(timezone.utc).isoformat()
    with path.open("w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
