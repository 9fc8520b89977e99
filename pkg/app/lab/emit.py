"""Deterministic CSV and JSON output."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from app.core.errors import IoFailure

# Column orders are part of the output contract.
COLUMNS = {
    "classify": ("x", "case_tag", "triggers", "min_etax", "t_min"),
    "evaluate": ("t", "x", "v", "vx", "eta", "etax", "f"),
    "trajectory": ("t", "i", "position", "velocity", "density_left_cell"),
    "observables": ("t", "momentum", "left", "right", "l1_to_limit", "min_spacing"),
    "sweep": ("param", "verdict", "t_first_zero"),
    "asymptotics": ("t", "to_tilde", "tilde_to_inf", "total_bound"),
    "picard": ("n", "sup_delta", "l2_delta", "ratio"),
    "nsp": ("d0", "bound", "exact_blowup", "numeric_blowup"),
}


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    return str(value)


def emit_csv(rows: Iterable[Sequence[Any]], path: Path, columns: Sequence[str]) -> int:
    """Write header plus rows; returns the number of data rows.

    Rows are formatted and width-checked before the file is opened, so a bad
    row never leaves a partial table behind.
    """
    width = len(columns)
    formatted = []
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(f"row {i} has {len(row)} fields, expected {width}")
        formatted.append([format_value(v) for v in row])
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            writer.writerows(formatted)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
    return len(formatted)


def write_json(payload: Mapping[str, Any], path: Path) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
