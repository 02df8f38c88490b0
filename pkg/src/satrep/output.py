"""Plot-ready tables and their CSV / JSON serialisation."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from satrep._version import __version__


@dataclass
class Table:
    name: str
    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)

    @classmethod
    def from_columns(cls, name, data: dict, metadata=None):
        cols = list(data)
        arrays = [np.asarray(v).tolist() for v in data.values()]
        lengths = {len(a) for a in arrays}
        if len(lengths) > 1:
            raise ValueError(f"columns of table {name!r} differ in length: {sorted(lengths)}")
        return cls(name, cols, [list(r) for r in zip(*arrays)], dict(metadata or {}))

    def column(self, name):
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def _plain(v):
    """numpy scalars and containers to plain Python values."""
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    return v


def format_number(v) -> str:
    v = _plain(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return "nan" if math.isnan(v) else format(v, ".17g")
    return str(v)


def _ordered_metadata(table: Table) -> dict:
    meta = {"table": table.name, "tool_version": __version__}
    meta.update(_plain(table.metadata))
    head = ["table", "config_hash", "seed", "tool_version"]
    return {k: meta[k] for k in head if k in meta} | {k: meta[k] for k in sorted(meta) if k not in head}


def to_csv(table: Table) -> str:
    buf = io.StringIO()
    for k, v in _ordered_metadata(table).items():
        text = json.dumps(v, sort_keys=True, allow_nan=True) if isinstance(v, (dict, list)) else format_number(v)
        buf.write(f"# {k}: {text}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_number(v) for v in row])
    return buf.getvalue()


def _json_value(v):
    v = _plain(v)
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, list):
        return [_json_value(x) for x in v]
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    return v


def to_json(table: Table) -> str:
    doc = {
        "metadata": _json_value(_ordered_metadata(table)),
        "columns": list(table.columns),
        "rows": [[_json_value(v) for v in row] for row in table.rows],
    }
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def emit_result(result: Table, format: str, path) -> Path:
    """Write ``result`` as ``csv`` or ``json``; the parent directory must exist."""
    if format not in ("csv", "json"):
        raise ValueError(f"unknown output format {format!r}")
    path = Path(path)
    text = to_csv(result) if format == "csv" else to_json(result)
    if not path.parent.is_dir():
        raise FileNotFoundError(f"output directory does not exist: {str(path.parent)!r}")
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {str(path)!r}: {exc.strerror}") from exc
    return path


def read_csv(path) -> Table:
    """Parse a file written by :func:`emit_result` back into a table."""
    meta, lines = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition(": ")
            meta[k] = v
        else:
            lines.append(line)
    reader = csv.reader(lines)
    columns = next(reader)
    rows = [[_parse_cell(x) for x in r] for r in reader]
    return Table(meta.get("table", ""), columns, rows, meta)


def _parse_cell(text):
    if text == "":
        return None
    try:
        return float(text)
    except ValueError:
        return text
